#ifndef SPECLAB_CHECKPOINT_HPP
#define SPECLAB_CHECKPOINT_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/errors.hpp"
#include "speclab/model.hpp"

namespace speclab {

/// Checkpoint file layout (all integers little-endian):
///   bytes 0..6   magic "SPECLAB"
///   u32          format_version (currently 1)
///   u64          header length in bytes
///   header       JSON text: model config, epoch, seed, generator state,
///                training-loss history
///   u64          parameter count
///   doubles      little-endian 64-bit parameter blob, model state order
struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;
    static constexpr const char* kMagic = "SPECLAB";

    std::uint32_t format_version = kFormatVersion;
    ModelConfig config;
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    std::array<std::uint64_t, 4> rng_state{};
    std::vector<double> loss_history;
    std::vector<double> params;
};

namespace detail {

template <typename T>
inline void write_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

template <typename T>
inline T read_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw IoError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

} // namespace detail

inline Checkpoint snapshot_model(Model& model, std::size_t epoch, std::uint64_t seed,
                                 const Rng& rng, const std::vector<double>& loss_history) {
    Checkpoint cp;
    cp.config = model.config;
    cp.epoch = epoch;
    cp.seed = seed;
    cp.rng_state = rng.state();
    cp.loss_history = loss_history;
    for (Tensor* t : model.state_tensors())
        cp.params.insert(cp.params.end(), t->data().begin(), t->data().end());
    return cp;
}

/// Rebuilds the model and copies the parameter blob back in. The rebuilt
/// model's forward pass is bitwise identical to the snapshotted one.
inline Model restore_model(const Checkpoint& cp) {
    Model model = build_model(cp.config, cp.seed);
    std::size_t offset = 0;
    for (Tensor* t : model.state_tensors()) {
        if (offset + t->size() > cp.params.size())
            throw IoError("checkpoint: parameter blob shorter than model state");
        std::memcpy(t->data().data(), cp.params.data() + offset, t->size() * sizeof(double));
        offset += t->size();
    }
    if (offset != cp.params.size())
        throw IoError("checkpoint: parameter blob longer than model state");
    return model;
}

inline std::string serialize_checkpoint(const Checkpoint& cp) {
    json header;
    header["config"] = cp.config.to_json();
    header["epoch"] = cp.epoch;
    header["seed"] = cp.seed;
    header["rng_state"] = {cp.rng_state[0], cp.rng_state[1], cp.rng_state[2], cp.rng_state[3]};
    header["loss_history"] = cp.loss_history;
    const std::string header_text = header.dump();

    std::string out;
    out += Checkpoint::kMagic;
    detail::write_le<std::uint32_t>(out, cp.format_version);
    detail::write_le<std::uint64_t>(out, header_text.size());
    out += header_text;
    detail::write_le<std::uint64_t>(out, cp.params.size());
    for (double v : cp.params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        detail::write_le<std::uint64_t>(out, bits);
    }
    return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
    const std::string magic = Checkpoint::kMagic;
    if (bytes.size() < magic.size() || bytes.compare(0, magic.size(), magic) != 0)
        throw IoError("checkpoint: bad magic, not a checkpoint file");
    std::size_t pos = magic.size();
    Checkpoint cp;
    cp.format_version = detail::read_le<std::uint32_t>(bytes, pos);
    if (cp.format_version != Checkpoint::kFormatVersion)
        throw IoError("checkpoint: unsupported format version " +
                      std::to_string(cp.format_version));
    const auto header_len = detail::read_le<std::uint64_t>(bytes, pos);
    if (pos + header_len > bytes.size()) throw IoError("checkpoint: truncated header");
    json header;
    try {
        header = json::parse(bytes.substr(pos, header_len));
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint: malformed header: ") + e.what());
    }
    pos += header_len;
    cp.config = ModelConfig::from_json(header.at("config"));
    cp.epoch = header.at("epoch").get<std::size_t>();
    cp.seed = header.at("seed").get<std::uint64_t>();
    const auto& rs = header.at("rng_state");
    for (std::size_t i = 0; i < 4; ++i) cp.rng_state[i] = rs.at(i).get<std::uint64_t>();
    cp.loss_history = header.at("loss_history").get<std::vector<double>>();

    const auto n = detail::read_le<std::uint64_t>(bytes, pos);
    cp.params.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t bits = detail::read_le<std::uint64_t>(bytes, pos);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        cp.params[i] = v;
    }
    return cp;
}

inline void save_checkpoint(const Checkpoint& cp, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    const std::string bytes = serialize_checkpoint(cp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("checkpoint: write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

} // namespace speclab

#endif
