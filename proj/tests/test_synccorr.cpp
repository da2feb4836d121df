#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "synckit/synccorr.hpp"

using namespace synckit;

TEST_CASE("pearson basics: identity, sign flip with shift, hand value") {
    std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    CHECK(pearson(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = -a[i] + 7.0;
    CHECK(pearson(a, b) == doctest::Approx(-1.0).epsilon(1e-12));

    // direct evaluation of the correlation formula: r = 6.5 / sqrt(5 * 8.75)
    std::vector<double> c{1.0, 2.0, 3.0, 5.0};
    CHECK(pearson(a, c) == doctest::Approx(0.9827076298239908).epsilon(1e-12));
    CHECK(pearson(a, c) == doctest::Approx(oracles::naive_pearson(a, c)).epsilon(1e-12));
}

TEST_CASE("zero variance gives an undefined marker, not zero") {
    std::vector<double> flat(10, 3.3);
    std::vector<double> live{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(is_missing(pearson(flat, live)));
    CHECK(is_missing(pearson(live, flat)));

    auto rolled = rolling_pearson(flat, live, 5);
    for (double v : rolled) CHECK(is_missing(v));
}

TEST_CASE("identical series give all-ones rolling correlation") {
    auto x = oracles::random_series(500, 3);
    for (int w : {2, 70, 200}) {
        auto r = rolling_pearson(x, x, w);
        CHECK(r.size() == x.size() - static_cast<std::size_t>(w) + 1);
        for (double v : r) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("streaming equals naive recomputation over 1e5 samples") {
    auto a = oracles::random_series(100000, 101);
    auto b = oracles::random_series(100000, 202);
    for (int w : {70, 100, 200}) {
        auto fast = rolling_pearson(a, b, w);
        auto slow = oracles::naive_rolling(a, b, w);
        REQUIRE(fast.size() == slow.size());
        double worst = 0;
        for (std::size_t i = 0; i < fast.size(); ++i)
            worst = std::max(worst, std::abs(fast[i] - slow[i]));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("scale and shift invariance") {
    auto a = oracles::random_series(3000, 7);
    auto b = oracles::random_series(3000, 8);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> alpha_dist(0.1, 5.0);
    for (int trial = 0; trial < 4; ++trial) {
        double alpha = alpha_dist(rng) * (trial % 2 ? -1.0 : 1.0);
        double beta = alpha_dist(rng) * 10.0;
        std::vector<double> scaled(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) scaled[i] = alpha * b[i] + beta;
        auto base = rolling_pearson(a, b, 100);
        auto tr = rolling_pearson(a, scaled, 100);
        double sign = alpha > 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < base.size(); ++i)
            CHECK(std::abs(tr[i] - sign * base[i]) < 1e-9);
    }
}

TEST_CASE("symmetry is exact") {
    auto a = oracles::random_series(5000, 13);
    auto b = oracles::random_series(5000, 14);
    auto ab = rolling_pearson(a, b, 70);
    auto ba = rolling_pearson(b, a, 70);
    for (std::size_t i = 0; i < ab.size(); ++i) CHECK(ab[i] == ba[i]);
}

TEST_CASE("windows containing missing samples are skipped") {
    auto a = oracles::random_series(300, 19);
    auto b = oracles::random_series(300, 20);
    a[150] = kMissing;
    auto r = rolling_pearson(a, b, 50);
    for (std::size_t k = 0; k < r.size(); ++k) {
        bool touches = k <= 150 && 150 < k + 50;
        CHECK(is_missing(r[k]) == touches);
    }
}

TEST_CASE("correlation matrix has C(p,2) unique entries, symmetric, unit diagonal") {
    std::vector<std::vector<double>> data;
    for (unsigned c = 0; c < 4; ++c) data.push_back(oracles::random_series(400, 30 + c));
    std::vector<std::span<const double>> spans(data.begin(), data.end());
    auto frame = correlation_matrix(spans, 100, 399);
    CHECK(frame.p == 4);
    int unique = 0;
    for (int i = 0; i < 4; ++i) {
        CHECK(frame.at(i, i) == 1.0);
        for (int j = i + 1; j < 4; ++j) {
            CHECK(frame.at(i, j) == frame.at(j, i));
            ++unique;
        }
    }
    CHECK(unique == 6);
    CHECK(all_pairs(6).size() == 15);
    CHECK(all_pairs(8).size() == 28);
    CHECK(all_pairs(12).size() == 66);
}

TEST_CASE("identical channels give a matrix of ones") {
    auto x = oracles::random_series(300, 44);
    std::vector<std::span<const double>> spans{x, x, x};
    auto frame = correlation_matrix(spans, 80, 299);
    for (double v : frame.r) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("white-noise channels rarely exceed |r| = 0.35 at window 100") {
    // Fisher: sd(atanh r) ~ 1/sqrt(97), so P(|r| > 0.35) ~ 3e-4 per entry
    std::vector<std::vector<double>> data;
    for (unsigned c = 0; c < 6; ++c) data.push_back(oracles::random_series(20000, 60 + c));
    std::vector<std::span<const double>> spans(data.begin(), data.end());
    auto pc = rolling_pairs(spans, 100, 2);
    std::size_t over = 0, total = 0;
    for (const auto& series : pc.r)
        for (double v : series) {
            ++total;
            if (std::abs(v) >= 0.35) ++over;
        }
    CHECK(static_cast<double>(over) / static_cast<double>(total) < 0.01);
}

TEST_CASE("emitted frames are positive semi-definite within tolerance") {
    std::mt19937 rng(71);
    std::normal_distribution<double> noise(0, 1);
    std::vector<std::vector<double>> data(5, std::vector<double>(600));
    // correlated channels: shared component plus noise
    std::vector<double> common(600);
    for (auto& v : common) v = noise(rng);
    for (auto& ch : data)
        for (std::size_t i = 0; i < ch.size(); ++i) ch[i] = common[i] + 0.8 * noise(rng);
    std::vector<std::span<const double>> spans(data.begin(), data.end());
    for (std::size_t end : {99UL, 250UL, 599UL}) {
        auto frame = correlation_matrix(spans, 100, end);
        auto ev = symmetric_eigenvalues(frame);
        CHECK(ev.front() >= -1e-8);
    }
}

TEST_CASE("multiway coefficient: identity 0, rank-one 1, uniform 0.5 case") {
    CorrelationFrame frame;
    frame.p = 3;
    frame.t_synch = 100;
    frame.r = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK(multiway_coeff(frame) == doctest::Approx(0.0).epsilon(1e-12));

    frame.r = {1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(multiway_coeff(frame) == doctest::Approx(1.0).epsilon(1e-9));

    // uniform off-diagonal r = 0.5: eigenvalues 2, 0.5, 0.5
    frame.r = {1, 0.5, 0.5, 0.5, 1, 0.5, 0.5, 0.5, 1};
    auto ev = symmetric_eigenvalues(frame);
    CHECK(ev[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(ev[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(ev[2] == doctest::Approx(2.0).epsilon(1e-9));
    // population std sqrt(0.5) scaled by sqrt(p-1): 0.5
    CHECK(multiway_coeff(frame) == doctest::Approx(0.5).epsilon(1e-9));

    frame.r = {1, 0.5, kMissing, 0.5, 1, 0.5, kMissing, 0.5, 1};
    CHECK(is_missing(multiway_coeff(frame)));
}

TEST_CASE("rolling_pairs is bit-identical across thread counts") {
    std::vector<std::vector<double>> data;
    for (unsigned c = 0; c < 5; ++c) data.push_back(oracles::random_series(3000, 80 + c));
    std::vector<std::span<const double>> spans(data.begin(), data.end());
    auto seq = rolling_pairs(spans, 70, 1);
    auto par = rolling_pairs(spans, 70, 4);
    REQUIRE(seq.r.size() == par.r.size());
    for (std::size_t q = 0; q < seq.r.size(); ++q)
        for (std::size_t k = 0; k < seq.r[q].size(); ++k) {
            if (is_missing(seq.r[q][k]))
                CHECK(is_missing(par.r[q][k]));
            else
                CHECK(seq.r[q][k] == par.r[q][k]);
        }
}

TEST_CASE("window bounds and validation") {
    auto x = oracles::random_series(100, 90);
    CHECK_THROWS_AS(rolling_pearson(x, x, 1), config_error);
    CHECK_THROWS_AS(rolling_pearson(x, x, 101), config_error);
    std::vector<double> short_b(50, 1.0);
    CHECK_THROWS_AS(rolling_pearson(x, short_b, 10), input_error);
    std::vector<std::span<const double>> one{x};
    CHECK_THROWS_AS(correlation_matrix(one, 10, 50), config_error);
}
