#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "gmwmx/linalg.hpp"
#include "gmwmx/noise_model.hpp"
#include "oracles.hpp"

using namespace gmwmx;
using Catch::Approx;

TEST_CASE("pl_coefficients recursion") {
    auto h = pl_coefficients(0.9, 3);
    CHECK(h[0] == 1.0);
    CHECK(h[1] == Approx(0.45).epsilon(1e-15));
    CHECK(h[2] == Approx(0.32625).epsilon(1e-15));

    auto h0 = pl_coefficients(0.0, 3);
    CHECK(h0[0] == 1.0);
    CHECK(h0[1] == 0.0);
    CHECK(h0[2] == 0.0);
}

TEST_CASE("pl_coefficients positive and decreasing for alpha in (0,1)") {
    for (double alpha : {0.2, 0.5, 0.9, 0.99}) {
        auto h = pl_coefficients(alpha, 4096);
        for (std::size_t i = 1; i < h.size(); ++i) {
            REQUIRE(h[i] > 0.0);
            if (i >= 2) REQUIRE(h[i] < h[i - 1]);
        }
    }
}

TEST_CASE("autocovariance of white noise") {
    NoiseModel m{{NoiseComponent::white_noise(10.0)}};
    auto s = autocovariance(m, 4);
    REQUIRE(s.mode == CovarianceSummary::Mode::Stationary);
    CHECK(s.seq == std::vector<double>{10.0, 0.0, 0.0, 0.0});
}

TEST_CASE("power-law lag-0 value matches the gamma expression") {
    NoiseModel m{{NoiseComponent::power_law(6.0, 0.9)}};
    auto s = autocovariance(m, 8);
    // 6 Gamma(0.1)/Gamma(0.55)^2, frozen from a 30-digit evaluation
    CHECK(s.seq[0] == Approx(21.854577774761117768).epsilon(1e-13));
}

TEST_CASE("component autocovariances add") {
    NoiseModel wn{{NoiseComponent::white_noise(10.0)}};
    NoiseModel pl{{NoiseComponent::power_law(6.0, 0.9)}};
    NoiseModel both{{NoiseComponent::white_noise(10.0), NoiseComponent::power_law(6.0, 0.9)}};
    auto a = autocovariance(wn, 16), b = autocovariance(pl, 16), c = autocovariance(both, 16);
    for (std::size_t k = 0; k < 16; ++k) CHECK(c.seq[k] == Approx(a.seq[k] + b.seq[k]).margin(1e-14));
}

TEST_CASE("autocovariance rejects non-stationary components") {
    NoiseModel m{{NoiseComponent::flicker(1.0)}};
    CHECK_THROWS_AS(autocovariance(m, 8), NonStationaryComponentPresent);
}

TEST_CASE("matern autocovariance normalization and shape") {
    NoiseModel m{{NoiseComponent::matern(8.0, 0.05, 1.1)}};
    auto s = autocovariance(m, 32);
    CHECK(s.seq[0] == 8.0);
    // frozen normalized correlation at x = 0.5 (nu = 0.6)
    CHECK(s.seq[10] == Approx(8.0 * 0.67082565327207133618).epsilon(1e-12));
    for (std::size_t k = 1; k < 32; ++k) CHECK(s.seq[k] < s.seq[k - 1]);
}

TEST_CASE("stationary Toeplitz matrices are PSD up to tolerance") {
    std::vector<NoiseModel> grid = {
        {{NoiseComponent::white_noise(4.0)}},
        {{NoiseComponent::power_law(6.0, 0.9)}},
        {{NoiseComponent::power_law(1.0, 0.5)}},
        {{NoiseComponent::matern(8.0, 0.05, 1.1)}},
        {{NoiseComponent::white_noise(10.0), NoiseComponent::power_law(6.0, 0.9)}},
    };
    for (const auto& m : grid) {
        auto s = autocovariance(m, 256);
        Eigen::MatrixXd t = toeplitz_from(s.seq, 256);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * s.seq[0]);
    }
}

TEST_CASE("diagonal averages of a stationary model equal its autocovariance") {
    NoiseModel m{{NoiseComponent::white_noise(10.0), NoiseComponent::power_law(6.0, 0.9)}};
    auto rho = autocovariance(m, 64);
    auto d = diagonal_averages(m, 64);
    REQUIRE(d.mode == CovarianceSummary::Mode::NonStationary);
    for (std::size_t k = 0; k < 64; ++k) CHECK(d.seq[k] == Approx(rho.seq[k]).margin(1e-12));
}

TEST_CASE("white-noise diagonal averages") {
    NoiseModel m{{NoiseComponent::white_noise(10.0)}};
    auto d = diagonal_averages(m, 8);
    CHECK(d.seq[0] == Approx(10.0).margin(1e-12));
    for (std::size_t k = 1; k < 8; ++k) CHECK(d.seq[k] == Approx(0.0).margin(1e-12));
}

TEST_CASE("flicker diagonal averages match brute-force U^T U averages") {
    NoiseModel m{{NoiseComponent::flicker(1.0)}};
    // hand value at n=3, k=0: (3 h0^2 + 2 h1^2 + h2^2)/3 with h = (1, 1/2, 3/8)
    auto d3 = diagonal_averages(m, 3);
    CHECK(d3.seq[0] == Approx(1.2135416666666666667).epsilon(1e-14));

    for (std::size_t n : {3ul, 17ul, 64ul, 128ul}) {
        auto d = diagonal_averages(m, n);
        auto ref = oracle::diag_averages(oracle::utu(1.0, 1.0, n));
        for (std::size_t k = 0; k < n; ++k) CHECK(d.seq[k] == Approx(ref[k]).margin(1e-10));
        // corner: single-entry diagonal h_0 h_{n-1}
        const auto h = pl_coefficients(1.0, n);
        CHECK(d.seq[n - 1] == Approx(h[0] * h[n - 1]).margin(1e-12));
    }
}

TEST_CASE("simulate is seed-deterministic") {
    NoiseModel m{{NoiseComponent::white_noise(4.0), NoiseComponent::power_law(2.0, 0.5)}};
    auto a = simulate(m, 512, 42);
    auto b = simulate(m, 512, 42);
    auto c = simulate(m, 512, 43);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("white-noise sample variance obeys the law of large numbers") {
    NoiseModel m{{NoiseComponent::white_noise(4.0)}};
    auto x = simulate(m, 100000, 7);
    CHECK(oracle::sample_autocov(x, 0) == Approx(4.0).margin(0.1));
    CHECK(oracle::sample_mean(x) == Approx(0.0).margin(0.05));
}

TEST_CASE("flicker path follows the truncated convolution exactly") {
    NoiseModel m{{NoiseComponent::flicker(1.0)}};
    const std::uint64_t seed = 99;
    auto e = simulate(m, 2, seed);
    // reproduce the innovation stream: component 0 draws from derive_seed(seed, 0)
    Rng rng(derive_seed(seed, 0));
    const double w0 = rng.gaussian(1.0);
    const double w1 = rng.gaussian(1.0);
    const auto h = pl_coefficients(1.0, 2);
    CHECK(e[0] == w0);
    CHECK(e[1] == w1 + h[1] * w0);
}

TEST_CASE("simulated stationary components match their autocovariance") {
    // lag-k sample autocovariance within 5 standard errors
    std::vector<NoiseModel> grid = {
        {{NoiseComponent::power_law(2.0, 0.5)}},
        {{NoiseComponent::matern(8.0, 0.05, 1.1)}},
    };
    const std::size_t n = 1u << 20;
    for (const auto& m : grid) {
        auto x = simulate(m, n, 1234);
        auto rho = autocovariance(m, 8);
        for (std::size_t k : {0ul, 1ul, 5ul}) {
            const double est = oracle::sample_autocov(x, k);
            // rough long-run SE bound: sqrt(2/n) * rho0 * inflation for dependence
            const double se = 6.0 * rho.seq[0] / std::sqrt(static_cast<double>(n) / 64.0);
            CHECK(std::abs(est - rho.seq[k]) < 5.0 * se);
        }
    }
}

TEST_CASE("model string parsing") {
    auto m = parse_noise_model("wn(10)+pl(6,0.9)");
    REQUIRE(m.components.size() == 2);
    CHECK(m.components[0].kind == NoiseKind::WhiteNoise);
    CHECK(m.components[0].sigma2() == 10.0);
    CHECK(m.components[1].kind == NoiseKind::PowerLaw);
    CHECK(m.components[1].params[1] == 0.9);
    CHECK(m.param_count() == 3);

    CHECK_NOTHROW(parse_noise_model("wn+fl"));
    CHECK_NOTHROW(parse_noise_model("matern(8,0.05,1.1)"));
    CHECK_THROWS_AS(parse_noise_model("wn+xy"), ParseError);
    CHECK_THROWS_AS(parse_noise_model(""), ParseError);
    CHECK_THROWS_AS(parse_noise_model("fl+fl"), Error); // two non-stationary components
}

TEST_CASE("validation rejects bad parameters") {
    NoiseModel neg{{NoiseComponent::white_noise(-1.0)}};
    CHECK_THROWS_AS(neg.validate(), Error);
    NoiseModel mat{{NoiseComponent::matern(1.0, 0.05, 0.4)}};
    CHECK_THROWS_AS(mat.validate(), Error);
}
