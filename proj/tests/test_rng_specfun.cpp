#include <doctest.h>

#include "nscascade/rng.hpp"
#include "nscascade/specfun.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

using namespace nscascade;

TEST_SUITE("rng") {

TEST_CASE("philox known answers")
{
    // Random123 kat_vectors for philox4x64-10 (the first two also match numpy.random.Philox).
    using B = RngStream::Block;
    CHECK(RngStream::philox({0, 0, 0, 0}, {0, 0}) ==
          B{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
    const std::uint64_t m = ~std::uint64_t{0};
    CHECK(RngStream::philox({m, m, m, m}, {m, m}) ==
          B{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
    CHECK(RngStream::philox({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                            {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
          B{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("streams are deterministic and distinct")
{
    RngStream a(7, 3, 11);
    RngStream b(7, 3, 11);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    std::set<std::uint64_t> firsts;
    for (std::uint64_t stream = 0; stream < 4; ++stream) {
        for (std::uint64_t sub = 0; sub < 4; ++sub) {
            firsts.insert(RngStream(7, stream, sub).next_u64());
        }
    }
    CHECK(firsts.size() == 16);
    CHECK(RngStream(7, 3).substream(5).next_u64() == RngStream(7, 3, 5).next_u64());
    CHECK(mix_seed(1, 1) != mix_seed(1, 2));
    CHECK(mix_seed(1, 1) != mix_seed(2, 1));
}

TEST_CASE("uniform stays in the open interval and exponential has unit mean")
{
    RngStream rng(42, 0);
    double sum = 0.0;
    double umin = 1.0;
    double umax = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        sum += rng.exponential();
    }
    CHECK(umin > 0.0);
    CHECK(umax < 1.0);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.005));
}

}

TEST_SUITE("specfun") {

TEST_CASE("li2 reference values")
{
    const double pi = 3.14159265358979323846;
    CHECK(li2(0.0) == 0.0);
    // Oracles: partial sums / mpmath polylog at 30 digits.
    CHECK(li2(1.0) == doctest::Approx(pi * pi / 6).epsilon(1e-14));
    CHECK(li2(-1.0) == doctest::Approx(-pi * pi / 12).epsilon(1e-14));
    CHECK(std::abs(li2(0.5) - 0.5822405264650125059) < 1e-14);
    CHECK(std::abs(li2(-0.5) + 0.44841420692364620244) < 1e-14);
    CHECK(std::abs(li2(0.9) - 1.299714723004958782) < 1e-14);
    CHECK(std::abs(li2(-0.99) + 0.81552588147733974292) < 1e-14);
    CHECK(std::abs(li2(0.3) - 0.32612951007547605633) < 1e-14);
    CHECK(std::abs(li2(-0.7) + 0.60515840233770525031) < 1e-14);
    CHECK_THROWS_AS(li2(1.5), std::domain_error);
}

TEST_CASE("li2 matches its defining series")
{
    for (double x : {-0.95, -0.4, 0.05, 0.45, 0.8}) {
        long double s = 0.0L;
        long double p = 1.0L;
        for (int k = 1; k < 4000; ++k) {
            p *= x;
            s += p / (static_cast<long double>(k) * k);
        }
        CHECK(std::abs(li2(x) - double(s)) < 1e-14);
    }
}

TEST_CASE("log_gamma")
{
    CHECK(log_gamma(1.0) == doctest::Approx(0.0));
    CHECK(log_gamma(2.0) == doctest::Approx(0.0));
    CHECK(std::abs(log_gamma(0.5) - 0.5 * std::log(3.14159265358979323846)) < 1e-13);
    CHECK(std::abs(log_gamma(0.1) - 2.252712651734205902) < 1e-13);
    CHECK(std::abs(log_gamma(3.7) - 1.4280723266653881292) < 1e-13);
    CHECK(std::abs(log_gamma(25.5) - 56.389167643719946744) < 1e-11);
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("truncated exponential")
{
    RngStream rng(5, 0);
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += sample_trunc_exp(0.0, std::numeric_limits<double>::infinity(), rng);
    }
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.005));

    double s01 = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double v = sample_trunc_exp(0.0, 1.0, rng);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        s01 += v;
    }
    const double e = std::exp(1.0);
    CHECK(s01 / 200000 == doctest::Approx(1.0 - 1.0 / (e - 1.0)).epsilon(0.005));

    for (double eps : {1e-3, 1e-9, 1e-14}) {
        const double v = sample_trunc_exp(2.0, 2.0 + eps, rng);
        CHECK(v >= 2.0);
        CHECK(v <= 2.0 + eps);
    }
    // Far tail window stays finite and inside.
    const double far = sample_trunc_exp(800.0, 801.0, rng);
    CHECK(far >= 800.0);
    CHECK(far <= 801.0);
    CHECK_THROWS_AS(sample_trunc_exp(1.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_trunc_exp(-1.0, 1.0, rng), std::invalid_argument);
}

}
