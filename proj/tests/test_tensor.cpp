#include <catch2/catch_amalgamated.hpp>

#include "speclab/rng.hpp"
#include "speclab/tensor.hpp"

#include <cmath>
#include <limits>

using namespace speclab;

TEST_CASE("tensor shape and value invariants") {
    Tensor t({2, 3});
    REQUIRE(t.size() == 6);
    REQUIRE(t.shape() == std::vector<std::size_t>{2, 3});
    for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(t[i] == 0.0);

    t.at(1, 2) = 5.0;
    REQUIRE(t[5] == 5.0);

    REQUIRE_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ValidationError);
    REQUIRE_THROWS_AS(Tensor({0, 3}), ValidationError);
}

TEST_CASE("checked mode rejects non-finite values") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(Tensor({2}, {1.0, nan}), ValidationError);
    REQUIRE_THROWS_AS(Tensor({2}, {inf, 0.0}), ValidationError);
}

TEST_CASE("row-major 3-D indexing") {
    Tensor t({2, 3, 4});
    t.at(1, 2, 3) = 7.0;
    REQUIRE(t[1 * 12 + 2 * 4 + 3] == 7.0);
}

TEST_CASE("mse basics") {
    Tensor a = Tensor::from_vector({1.0, 2.0});
    Tensor b = Tensor::from_vector({1.0, 4.0});
    REQUIRE(mse(a, a) == 0.0);
    REQUIRE(mse(a, b) == Catch::Approx(2.0));
    REQUIRE_THROWS_AS(mse(a, Tensor({3})), ValidationError);
}

TEST_CASE("rng is deterministic and serializable") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    const auto state = a.state();
    const double next = a.uniform();
    Rng c(0);
    c.set_state(state);
    REQUIRE(c.uniform() == next);
}

TEST_CASE("rng gaussian moments are sane") {
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(std::abs(var - 1.0) < 0.02);
}
