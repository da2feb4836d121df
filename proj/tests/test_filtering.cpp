#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "synckit/filtering.hpp"

using namespace synckit;

TEST_CASE("constant input stays constant (unit DC gain)") {
    std::vector<double> x(500, 3.75);
    for (int order : {2, 4}) {
        auto y = lowpass(x, {.cutoff = 0.1, .order = order});
        for (std::size_t i = 100; i < y.size(); ++i)
            CHECK(std::abs(y[i] - 3.75) < 1e-9);
    }
    LowpassFilter f({.cutoff = 0.1, .order = 2});
    CHECK(f.magnitude(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alternating input at Nyquist is attenuated at least 20 dB") {
    std::vector<double> x(4000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
    LowpassFilter f({.cutoff = 0.1, .order = 2});
    auto y = f.apply(x);

    double measured = 0;
    for (std::size_t i = 2000; i < y.size(); ++i) measured = std::max(measured, std::abs(y[i]));
    double designed = oracles::sos_magnitude(f.sections(), std::numbers::pi);
    CHECK(measured <= designed + 1e-9);
    CHECK(measured < 0.1);  // >= 20 dB down
}

TEST_CASE("slow sinusoid passes within 5%") {
    const double omega = 0.01 * std::numbers::pi;  // 0.01 x Nyquist
    std::vector<double> x(20000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(omega * static_cast<double>(i));
    LowpassFilter f({.cutoff = 0.1, .order = 2});
    auto y = f.apply(x);

    double measured = 0;
    for (std::size_t i = x.size() / 2; i < y.size(); ++i)
        measured = std::max(measured, std::abs(y[i]));
    CHECK(measured == doctest::Approx(1.0).epsilon(0.05));
    double designed = oracles::sos_magnitude(f.sections(), omega);
    CHECK(measured == doctest::Approx(designed).epsilon(0.01));
}

TEST_CASE("filter is linear") {
    std::mt19937 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(800), y(800);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = noise(rng);
        y[i] = noise(rng) * 2.0 + 0.3;
    }
    const double a = 1.7, b = -2.4;
    std::vector<double> combined(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) combined[i] = a * x[i] + b * y[i];

    LowpassFilter f({.cutoff = 0.1, .order = 4});
    auto fx = f.apply(x);
    auto fy = f.apply(y);
    auto fc = f.apply(combined);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(fc[i] - (a * fx[i] + b * fy[i])) < 1e-9);
}

TEST_CASE("parameter validation") {
    std::vector<double> x(100, 0.0);
    CHECK_THROWS_AS(lowpass(x, {.cutoff = 0.0, .order = 2}), config_error);
    CHECK_THROWS_AS(lowpass(x, {.cutoff = 1.0, .order = 2}), config_error);
    CHECK_THROWS_AS(lowpass(x, {.cutoff = 1.5, .order = 2}), config_error);
    CHECK_THROWS_AS(lowpass(x, {.cutoff = 0.1, .order = 3}), config_error);
    std::vector<double> tiny(5, 0.0);
    CHECK_THROWS_AS(lowpass(tiny, {.cutoff = 0.1, .order = 2}), config_error);
}

TEST_CASE("missing samples split the series; each run filters independently") {
    std::vector<double> x(300, 1.0);
    for (std::size_t i = 100; i < 110; ++i) x[i] = kMissing;
    for (std::size_t i = 110; i < 300; ++i) x[i] = 2.0;
    auto y = lowpass(x, {.cutoff = 0.1, .order = 2});
    for (std::size_t i = 100; i < 110; ++i) CHECK(is_missing(y[i]));
    CHECK(std::abs(y[50] - 1.0) < 1e-9);
    // second run re-seeds at its own start: no bleed-through from the 1.0 run
    CHECK(std::abs(y[110] - 2.0) < 1e-9);
    CHECK(std::abs(y[299] - 2.0) < 1e-9);
}
