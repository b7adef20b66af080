#ifndef SPECLAB_MODEL_HPP
#define SPECLAB_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/errors.hpp"
#include "speclab/fourier.hpp"
#include "speclab/layers.hpp"
#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

namespace speclab {

using json = nlohmann::ordered_json;

enum class ModelKind { ae, vae, mlp };
enum class Precursor { none, rft, tft };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::ae: return "ae";
        case ModelKind::vae: return "vae";
        case ModelKind::mlp: return "mlp";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    if (s == "ae") return ModelKind::ae;
    if (s == "vae") return ModelKind::vae;
    if (s == "mlp") return ModelKind::mlp;
    throw ValidationError("model.kind: unknown kind '" + s + "'");
}

inline const char* precursor_name(Precursor p) {
    switch (p) {
        case Precursor::none: return "none";
        case Precursor::rft: return "rft";
        case Precursor::tft: return "tft";
    }
    return "?";
}

inline Precursor precursor_from_name(const std::string& s) {
    if (s == "none") return Precursor::none;
    if (s == "rft") return Precursor::rft;
    if (s == "tft") return Precursor::tft;
    throw ValidationError("fourier.precursor: unknown precursor '" + s + "'");
}

/// One encoder/decoder stack entry. Dense layers flatten whatever precedes
/// them; a reshape entry is required before returning to [channels, T] form.
struct LayerSpec {
    enum class Kind { dense, conv, conv_t, activation, reshape };

    Kind kind = Kind::dense;
    std::size_t units = 0;                       // dense
    std::size_t out_channels = 0, kernel = 1;    // conv / conv_t
    std::size_t stride = 1, padding = 0, output_padding = 0;
    std::size_t channels = 0, time = 0;          // reshape
    std::string activation = "relu";             // activation entries only

    json to_json() const {
        json j;
        switch (kind) {
            case Kind::dense:
                j["type"] = "dense";
                j["units"] = units;
                break;
            case Kind::conv:
                j["type"] = "conv";
                j["out_channels"] = out_channels;
                j["kernel"] = kernel;
                j["stride"] = stride;
                j["padding"] = padding;
                break;
            case Kind::conv_t:
                j["type"] = "convt";
                j["out_channels"] = out_channels;
                j["kernel"] = kernel;
                j["stride"] = stride;
                j["padding"] = padding;
                j["output_padding"] = output_padding;
                break;
            case Kind::activation:
                j["type"] = "activation";
                j["kind"] = activation;
                break;
            case Kind::reshape:
                j["type"] = "reshape";
                j["channels"] = channels;
                j["time"] = time;
                break;
        }
        return j;
    }

    static LayerSpec from_json(const json& j) {
        LayerSpec s;
        const std::string type = j.at("type").get<std::string>();
        if (type == "dense") {
            s.kind = Kind::dense;
            s.units = j.at("units").get<std::size_t>();
        } else if (type == "conv") {
            s.kind = Kind::conv;
            s.out_channels = j.at("out_channels").get<std::size_t>();
            s.kernel = j.at("kernel").get<std::size_t>();
            s.stride = j.value("stride", 1);
            s.padding = j.value("padding", 0);
        } else if (type == "convt") {
            s.kind = Kind::conv_t;
            s.out_channels = j.at("out_channels").get<std::size_t>();
            s.kernel = j.at("kernel").get<std::size_t>();
            s.stride = j.value("stride", 1);
            s.padding = j.value("padding", 0);
            s.output_padding = j.value("output_padding", 0);
        } else if (type == "activation") {
            s.kind = Kind::activation;
            s.activation = j.at("kind").get<std::string>();
        } else if (type == "reshape") {
            s.kind = Kind::reshape;
            s.channels = j.at("channels").get<std::size_t>();
            s.time = j.at("time").get<std::size_t>();
        } else {
            throw ValidationError("layer spec: unknown type '" + type + "'");
        }
        return s;
    }

    static LayerSpec dense_spec(std::size_t units) {
        LayerSpec s;
        s.kind = Kind::dense;
        s.units = units;
        return s;
    }
    static LayerSpec conv_spec(std::size_t out_ch, std::size_t k, std::size_t stride,
                               std::size_t padding) {
        LayerSpec s;
        s.kind = Kind::conv;
        s.out_channels = out_ch;
        s.kernel = k;
        s.stride = stride;
        s.padding = padding;
        return s;
    }
    static LayerSpec convt_spec(std::size_t out_ch, std::size_t k, std::size_t stride,
                                std::size_t padding, std::size_t output_padding) {
        LayerSpec s;
        s.kind = Kind::conv_t;
        s.out_channels = out_ch;
        s.kernel = k;
        s.stride = stride;
        s.padding = padding;
        s.output_padding = output_padding;
        return s;
    }
    static LayerSpec act_spec(const std::string& kind) {
        LayerSpec s;
        s.kind = Kind::activation;
        s.activation = kind;
        return s;
    }
    static LayerSpec reshape_spec(std::size_t channels, std::size_t time) {
        LayerSpec s;
        s.kind = Kind::reshape;
        s.channels = channels;
        s.time = time;
        return s;
    }
};

/// Full architecture description; round-trips through JSON and is embedded
/// in checkpoint headers.
struct ModelConfig {
    ModelKind kind = ModelKind::ae;
    Precursor precursor = Precursor::none;
    std::size_t input_channels = 1;
    std::size_t time_steps = 1;       // 1 for flat vectors
    std::size_t fourier_m = 32;
    double sigma_f = 1.0;
    FourierNorm fourier_norm = FourierNorm::none;
    bool duplicate_input = false;     // tile raw channels to 2m for baselines
    std::vector<LayerSpec> encoder;
    std::size_t latent_dim = 16;
    std::vector<LayerSpec> decoder;
    double beta_kl = 1.0;

    json to_json() const {
        json j;
        j["kind"] = model_kind_name(kind);
        j["precursor"] = precursor_name(precursor);
        j["input_channels"] = input_channels;
        j["time_steps"] = time_steps;
        j["fourier_m"] = fourier_m;
        j["sigma_f"] = sigma_f;
        j["fourier_norm"] = fourier_norm == FourierNorm::inv_sqrt_m ? "inv_sqrt_m" : "none";
        j["duplicate_input"] = duplicate_input;
        j["latent_dim"] = latent_dim;
        j["beta_kl"] = beta_kl;
        j["encoder"] = json::array();
        for (const auto& s : encoder) j["encoder"].push_back(s.to_json());
        j["decoder"] = json::array();
        for (const auto& s : decoder) j["decoder"].push_back(s.to_json());
        return j;
    }

    static ModelConfig from_json(const json& j) {
        ModelConfig c;
        c.kind = model_kind_from_name(j.at("kind").get<std::string>());
        c.precursor = precursor_from_name(j.value("precursor", "none"));
        c.input_channels = j.value("input_channels", 1);
        c.time_steps = j.value("time_steps", 1);
        c.fourier_m = j.value("fourier_m", 32);
        c.sigma_f = j.value("sigma_f", 1.0);
        const std::string norm = j.value("fourier_norm", "none");
        if (norm == "inv_sqrt_m")
            c.fourier_norm = FourierNorm::inv_sqrt_m;
        else if (norm == "none")
            c.fourier_norm = FourierNorm::none;
        else
            throw ValidationError("fourier_norm: unknown value '" + norm + "'");
        c.duplicate_input = j.value("duplicate_input", false);
        if (c.kind != ModelKind::mlp && !j.contains("latent_dim"))
            throw ValidationError("model config: missing required key 'latent_dim'");
        c.latent_dim = j.value("latent_dim", 16);
        c.beta_kl = j.value("beta_kl", 1.0);
        if (j.contains("encoder"))
            for (const auto& e : j.at("encoder")) c.encoder.push_back(LayerSpec::from_json(e));
        if (j.contains("decoder"))
            for (const auto& e : j.at("decoder")) c.decoder.push_back(LayerSpec::from_json(e));
        return c;
    }
};

/// One reparameterized draw: z = mu + exp(log_var / 2) * eps.
struct LatentSample {
    Tensor mu;
    Tensor log_var;
    Tensor eps;
    Tensor z;
};

/// KL(q || N(0, I)) for a diagonal Gaussian posterior:
/// 0.5 * sum(mu^2 + exp(log_var) - 1 - log_var).
inline double kl_divergence(const Tensor& mu, const Tensor& log_var) {
    if (!mu.same_shape(log_var))
        throw ValidationError("kl_divergence: mu/log_var shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += mu[i] * mu[i] + std::exp(log_var[i]) - 1.0 - log_var[i];
    return 0.5 * s;
}

struct LossBreakdown {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

/// Autoencoder / variational autoencoder / benchmark regressor assembled
/// from the fixed layer menu, with an optional Fourier precursor.
///
/// For the mlp kind there is no decoder: the "encoder" stack is the whole
/// network and loss() compares its output against the target directly.
class Model {
public:
    ModelConfig config;
    std::unique_ptr<FourierFeatureLayer> precursor;   // rft / tft
    std::unique_ptr<DuplicateChannelsLayer> duplicator;
    Sequential encoder;
    Sequential decoder;

    bool eval_mode = false;

    // --- inference ----------------------------------------------------

    Tensor encode_deterministic(const Tensor& x) {
        return encoder.forward(apply_precursor(x));
    }

    /// VAE encode: splits the encoder head into mu and log sigma^2 and draws
    /// eps from `rng` (all-zero eps in eval mode or when rng is null).
    LatentSample encode_latent(const Tensor& x, Rng* rng) {
        if (config.kind != ModelKind::vae)
            throw ValidationError("encode_latent: model is not a vae");
        Tensor h = encode_deterministic(x);
        const std::size_t ld = config.latent_dim;
        if (h.size() != 2 * ld)
            throw ValidationError("vae encoder head produced " + std::to_string(h.size()) +
                                  " values, expected " + std::to_string(2 * ld));
        LatentSample s;
        s.mu = Tensor({ld});
        s.log_var = Tensor({ld});
        s.eps = Tensor({ld});
        s.z = Tensor({ld});
        for (std::size_t i = 0; i < ld; ++i) {
            s.mu[i] = h[i];
            s.log_var[i] = h[ld + i];
            s.eps[i] = (eval_mode || rng == nullptr) ? 0.0 : rng->gaussian();
            s.z[i] = s.mu[i] + std::exp(s.log_var[i] / 2.0) * s.eps[i];
        }
        return s;
    }

    Tensor decode(const Tensor& z) {
        if (config.kind == ModelKind::mlp)
            throw ValidationError("decode: mlp model has no decoder");
        if (z.size() != config.latent_dim)
            throw ValidationError("decode: latent size " + std::to_string(z.size()) +
                                  " != latent_dim " + std::to_string(config.latent_dim));
        return decoder.forward(z);
    }

    /// Eval-mode reconstruction (VAE uses z = mu): the anomaly-scoring path.
    Tensor reconstruct(const Tensor& x) {
        switch (config.kind) {
            case ModelKind::ae:
                return decode(encode_deterministic(x));
            case ModelKind::vae: {
                LatentSample s = encode_latent(x, nullptr);
                return decode(eval_mode ? s.mu : s.z);
            }
            case ModelKind::mlp:
                return encode_deterministic(x);
        }
        throw ValidationError("reconstruct: bad model kind");
    }

    // --- training step -------------------------------------------------

    /// Forward + full backward: computes the loss breakdown and accumulates
    /// parameter gradients. `rng` supplies eps for the VAE reparameterization
    /// (may be null => eps = 0). `kl_scale` multiplies beta_kl (warm-up).
    LossBreakdown loss_and_backward(const Tensor& x, const Tensor& target, Rng* rng,
                                    double kl_scale = 1.0, bool backward = true) {
        LossBreakdown out;
        if (config.kind == ModelKind::vae) {
            LatentSample s = encode_latent(x, rng);
            Tensor xhat = decode(s.z);
            out.recon = mse(xhat, target);
            out.kl = kl_divergence(s.mu, s.log_var);
            const double beta = config.beta_kl * kl_scale;
            out.total = out.recon + beta * out.kl;
            if (!backward) return out;

            Tensor dxhat = mse_grad(xhat, target);
            Tensor dz = decoder.backward(dxhat);
            const std::size_t ld = config.latent_dim;
            Tensor dhead({2 * ld});
            for (std::size_t i = 0; i < ld; ++i) {
                // z = mu + exp(lv/2) eps; KL grads: mu and (exp(lv) - 1)/2.
                dhead[i] = dz[i] + beta * s.mu[i];
                dhead[ld + i] = dz[i] * s.eps[i] * 0.5 * std::exp(s.log_var[i] / 2.0) +
                                beta * 0.5 * (std::exp(s.log_var[i]) - 1.0);
            }
            backprop_precursor(encoder.backward(dhead));
        } else {
            Tensor yhat = config.kind == ModelKind::ae
                              ? decode(encode_deterministic(x))
                              : encode_deterministic(x);
            out.recon = mse(yhat, target);
            out.kl = 0.0;
            out.total = out.recon;
            if (!backward) return out;

            Tensor dy = mse_grad(yhat, target);
            Tensor dz = config.kind == ModelKind::ae ? decoder.backward(dy) : dy;
            if (config.kind == ModelKind::ae)
                backprop_precursor(encoder.backward(dz));
            else
                backprop_precursor(encoder.backward(dy));
        }
        return out;
    }

    LossBreakdown loss(const Tensor& x, const Tensor& target, Rng* rng = nullptr,
                       double kl_scale = 1.0) {
        return loss_and_backward(x, target, rng, kl_scale, false);
    }

    // --- parameter plumbing ---------------------------------------------

    std::vector<Tensor*> params() {
        std::vector<Tensor*> out;
        if (precursor)
            for (Tensor* p : precursor->params()) out.push_back(p);
        for (Tensor* p : encoder.params()) out.push_back(p);
        for (Tensor* p : decoder.params()) out.push_back(p);
        return out;
    }

    std::vector<Tensor*> grads() {
        std::vector<Tensor*> out;
        if (precursor)
            for (Tensor* g : precursor->grads()) out.push_back(g);
        for (Tensor* g : encoder.grads()) out.push_back(g);
        for (Tensor* g : decoder.grads()) out.push_back(g);
        return out;
    }

    /// Everything a checkpoint must persist, in a stable order (includes the
    /// non-trainable RFT frequency matrix).
    std::vector<Tensor*> state_tensors() {
        std::vector<Tensor*> out;
        if (precursor) out.push_back(&precursor->frequencies());
        for (Tensor* s : encoder.state_tensors()) out.push_back(s);
        for (Tensor* s : decoder.state_tensors()) out.push_back(s);
        return out;
    }

    void zero_grads() {
        if (precursor) precursor->zero_grads();
        encoder.zero_grads();
        decoder.zero_grads();
    }

    std::string first_nonfinite_layer(const Tensor& x) {
        Tensor h = x;
        if (precursor) {
            h = precursor->forward(h);
            if (!h.all_finite()) return precursor->name();
        } else if (duplicator) {
            h = duplicator->forward(h);
        }
        std::string bad = encoder.first_nonfinite_layer(h);
        if (!bad.empty()) return "encoder." + bad;
        if (config.kind == ModelKind::mlp) return "";
        Tensor z = encoder.forward(h);
        if (config.kind == ModelKind::vae) {
            const std::size_t ld = config.latent_dim;
            Tensor mu({ld});
            for (std::size_t i = 0; i < ld; ++i) mu[i] = z[i];
            z = mu;
        }
        bad = decoder.first_nonfinite_layer(z);
        if (!bad.empty()) return "decoder." + bad;
        return "";
    }

private:
    Tensor apply_precursor(const Tensor& x) {
        if (precursor) return precursor->forward(prepare_series(x));
        if (duplicator) return duplicator->forward(to_series(x));
        return x;
    }

    void backprop_precursor(const Tensor& upstream) {
        if (precursor)
            precursor->backward(upstream);
        else if (duplicator)
            duplicator->backward(upstream);
    }

    // Fourier layer accepts [d] or [d, T]; pass time series through as-is.
    Tensor prepare_series(const Tensor& x) const { return x; }

    Tensor to_series(const Tensor& x) const {
        if (x.rank() == 2) return x;
        return x.reshaped({x.size(), 1});
    }

    static Tensor mse_grad(const Tensor& yhat, const Tensor& target) {
        Tensor g(yhat.shape());
        const double scale = 2.0 / static_cast<double>(yhat.size());
        for (std::size_t i = 0; i < yhat.size(); ++i)
            g[i] = scale * (yhat[i] - target[i]);
        return g;
    }
};

namespace detail {

struct ShapeCursor {
    // Either [channels, time] or a flat vector of `flat` entries.
    bool is_series = false;
    std::size_t channels = 0, time = 0, flat = 0;

    std::size_t total() const { return is_series ? channels * time : flat; }
};

inline void append_layer(Sequential& seq, const LayerSpec& spec, ShapeCursor& cur, Rng& rng) {
    switch (spec.kind) {
        case LayerSpec::Kind::dense: {
            seq.add(std::make_unique<DenseLayer>(
                DenseLayer::random(cur.total(), spec.units, rng)));
            cur = {false, 0, 0, spec.units};
            break;
        }
        case LayerSpec::Kind::conv: {
            if (!cur.is_series)
                throw ValidationError("conv layer requires [channels, T] input; add a reshape");
            auto layer = Conv1dLayer::random(cur.channels, spec.out_channels, spec.kernel,
                                             spec.stride, spec.padding, rng);
            const std::size_t t_out = layer.out_length(cur.time);
            seq.add(std::make_unique<Conv1dLayer>(std::move(layer)));
            cur = {true, spec.out_channels, t_out, 0};
            break;
        }
        case LayerSpec::Kind::conv_t: {
            if (!cur.is_series)
                throw ValidationError("convt layer requires [channels, T] input; add a reshape");
            auto layer = ConvTranspose1dLayer::random(cur.channels, spec.out_channels,
                                                      spec.kernel, spec.stride, spec.padding,
                                                      spec.output_padding, rng);
            const std::size_t t_out = layer.out_length(cur.time);
            seq.add(std::make_unique<ConvTranspose1dLayer>(std::move(layer)));
            cur = {true, spec.out_channels, t_out, 0};
            break;
        }
        case LayerSpec::Kind::activation: {
            seq.add(std::make_unique<ActivationLayer>(activation_from_name(spec.activation)));
            break;
        }
        case LayerSpec::Kind::reshape: {
            if (spec.channels * spec.time != cur.total())
                throw ValidationError("reshape to [" + std::to_string(spec.channels) + "," +
                                      std::to_string(spec.time) + "] does not match " +
                                      std::to_string(cur.total()) + " incoming values");
            seq.add(std::make_unique<ReshapeLayer>(
                std::vector<std::size_t>{spec.channels, spec.time}));
            cur = {true, spec.channels, spec.time, 0};
            break;
        }
    }
}

} // namespace detail

/// Instantiates a model from its config with seeded initialization.
/// Encoder output must be latent_dim (ae) or 2*latent_dim (vae); decoder
/// output must match the input shape. Violations are reported here, not at
/// training time.
inline Model build_model(const ModelConfig& cfg, std::uint64_t seed) {
    Model model;
    model.config = cfg;
    Rng rng(seed);

    detail::ShapeCursor cur;
    if (cfg.time_steps > 1) {
        cur = {true, cfg.input_channels, cfg.time_steps, 0};
    } else {
        cur = {false, 0, 0, cfg.input_channels};
    }

    if (cfg.precursor != Precursor::none) {
        model.precursor = std::make_unique<FourierFeatureLayer>(init_fourier(
            cfg.input_channels, cfg.fourier_m, cfg.sigma_f,
            cfg.precursor == Precursor::tft, rng.next_u64(), cfg.fourier_norm));
        if (cur.is_series)
            cur.channels = 2 * cfg.fourier_m;
        else
            cur.flat = 2 * cfg.fourier_m;
    } else if (cfg.duplicate_input) {
        model.duplicator = std::make_unique<DuplicateChannelsLayer>(
            cfg.input_channels, 2 * cfg.fourier_m);
        cur = {true, 2 * cfg.fourier_m, cfg.time_steps, 0};
    }

    for (const auto& spec : cfg.encoder) detail::append_layer(model.encoder, spec, cur, rng);

    if (cfg.kind == ModelKind::vae) {
        if (cur.total() != 2 * cfg.latent_dim)
            throw ValidationError("vae encoder must end with 2*latent_dim = " +
                                  std::to_string(2 * cfg.latent_dim) + " values, got " +
                                  std::to_string(cur.total()));
    } else if (cfg.kind == ModelKind::ae) {
        if (cur.total() != cfg.latent_dim)
            throw ValidationError("ae encoder must end with latent_dim = " +
                                  std::to_string(cfg.latent_dim) + " values, got " +
                                  std::to_string(cur.total()));
    }

    if (cfg.kind != ModelKind::mlp) {
        detail::ShapeCursor dcur{false, 0, 0, cfg.latent_dim};
        for (const auto& spec : cfg.decoder) detail::append_layer(model.decoder, spec, dcur, rng);
        const bool want_series = cfg.time_steps > 1;
        const bool shape_ok =
            want_series ? (dcur.is_series && dcur.channels == cfg.input_channels &&
                           dcur.time == cfg.time_steps)
                        : (dcur.total() == cfg.input_channels);
        if (!shape_ok)
            throw ValidationError("decoder output shape does not match input [" +
                                  std::to_string(cfg.input_channels) + "," +
                                  std::to_string(cfg.time_steps) + "]");
    }
    return model;
}

/// The 1-D benchmark regressor: 1 -> 256 -> 256 -> 1 with tanh, preceded by
/// the Fourier layer when a precursor is requested.
inline ModelConfig benchmark_mlp_config(Precursor precursor, std::size_t m = 32,
                                        double sigma_f = 1.0,
                                        std::size_t hidden = 256) {
    ModelConfig cfg;
    cfg.kind = ModelKind::mlp;
    cfg.precursor = precursor;
    cfg.input_channels = 1;
    cfg.time_steps = 1;
    cfg.fourier_m = m;
    cfg.sigma_f = sigma_f;
    cfg.encoder = {
        LayerSpec::dense_spec(hidden), LayerSpec::act_spec("tanh"),
        LayerSpec::dense_spec(hidden), LayerSpec::act_spec("tanh"),
        LayerSpec::dense_spec(1),
    };
    return cfg;
}

/// Default CAE/CVAE architecture for [d, T] windows (all sizes overridable
/// through the config file): two stride-2 width-5 convolutions into a dense
/// latent head, mirrored with transposed convolutions.
inline ModelConfig default_window_config(ModelKind kind, Precursor precursor,
                                         std::size_t d, std::size_t t,
                                         std::size_t latent = 16, std::size_t m = 32,
                                         double sigma_f = 1.0) {
    if (t % 4 != 0)
        throw ValidationError("default architecture requires time_steps divisible by 4");
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.precursor = precursor;
    cfg.input_channels = d;
    cfg.time_steps = t;
    cfg.fourier_m = m;
    cfg.sigma_f = sigma_f;
    cfg.latent_dim = latent;
    const std::size_t t2 = t / 2, t4 = t / 4;
    const std::size_t head = (kind == ModelKind::vae) ? 2 * latent : latent;
    cfg.encoder = {
        LayerSpec::conv_spec(32, 5, 2, 2), LayerSpec::act_spec("relu"),
        LayerSpec::conv_spec(64, 5, 2, 2), LayerSpec::act_spec("relu"),
        LayerSpec::dense_spec(head),
    };
    cfg.decoder = {
        LayerSpec::dense_spec(64 * t4),
        LayerSpec::act_spec("relu"),
        LayerSpec::reshape_spec(64, t4),
        LayerSpec::convt_spec(32, 5, 2, 2, 1),
        LayerSpec::act_spec("relu"),
        LayerSpec::convt_spec(d, 5, 2, 2, 1),
    };
    (void)t2;
    return cfg;
}

} // namespace speclab

#endif
