#include <algorithm>
#include <cmath>
#include <limits>

#include "core/fuzzy_rule.hpp"
#include "test_util.hpp"

using namespace fuzzyboost;
using doctest::Approx;
using testutil::error_of;

namespace {

GaussianMF mf(double center, double width) { return GaussianMF{center, width}; }

FuzzyRule rule_of(std::initializer_list<GaussianMF> sets) {
    FuzzyRule r;
    r.memberships = sets;
    return r;
}

std::vector<float> vec(std::initializer_list<float> v) { return v; }

// Width that puts membership 0.5 at distance `half` from the center.
double half_power_width(double half) {
    // exp(-(half/w)^2) = 1/2  =>  w = half / sqrt(ln 2)
    return half / std::sqrt(std::log(2.0));
}

}  // namespace

TEST_CASE("membership peaks at the center") {
    CHECK(membership(mf(0, 1), 0) == 1.0);
    CHECK(membership(mf(-3.5, 0.2), -3.5) == 1.0);
}

TEST_CASE("membership at two widths from the center is exp(-4)") {
    CHECK(membership(mf(0, 1), 2) == Approx(std::exp(-4.0)).epsilon(1e-15));
    CHECK(membership(mf(0, 1), 2) == Approx(0.0183156).epsilon(1e-5));
    CHECK(membership(mf(0, 1), -2) == membership(mf(0, 1), 2));
}

TEST_CASE("half-power width gives membership 0.5 at center +- d/2") {
    const double d = 2.7;
    const auto g = mf(3, half_power_width(d / 2));
    CHECK(g(3 + d / 2) == Approx(0.5).epsilon(1e-14));
    CHECK(g(3 - d / 2) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fit on column {2, 4}") {
    const DescriptorMatrix m(1, {2.0f, 4.0f});
    const auto r = fit_rule(m);
    REQUIRE(r.dim() == 1);
    CHECK(r.memberships[0].center == 3.0);
    CHECK(r.memberships[0].width == Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-15));
    CHECK(r.memberships[0].width == Approx(1.2011).epsilon(1e-4));
    CHECK(r.memberships[0](2.0) == Approx(0.5).epsilon(1e-12));
    CHECK(r.memberships[0](4.0) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("constant column uses the width floor") {
    const DescriptorMatrix m(1, {5.0f, 5.0f, 5.0f});
    SigmaFloor floor{1e-3, 1e-6};
    const auto r = fit_rule(m, floor);
    CHECK(r.memberships[0].center == 5.0);
    CHECK(r.memberships[0].width == 1e-3);
    CHECK(r.memberships[0](5.0) == 1.0);

    const DescriptorMatrix big(1, {4000.0f, 4000.0f});
    CHECK(fit_rule(big, floor).memberships[0].width == Approx(4e-3));
}

TEST_CASE("single row centers the rule on that descriptor") {
    const DescriptorMatrix m(3, {1.0f, -2.0f, 0.5f});
    const SigmaFloor floor{0.01, 0.0};
    const auto r = fit_rule(m, floor);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(r.memberships[n].center == static_cast<double>(m.row(0)[n]));
        CHECK(r.memberships[n].width == 0.01);
    }
    CHECK(activation(r, m.row(0), TNorm::minimum) == 1.0);
}

TEST_CASE("fit rejects empty and non-finite input") {
    CHECK(error_of([] { fit_rule(DescriptorMatrix(2)); }) == ErrorCode::empty_input);
    const DescriptorMatrix bad(1, {1.0f, std::numeric_limits<float>::infinity()});
    CHECK(error_of([&] { fit_rule(bad); }) == ErrorCode::non_finite_value);
}

TEST_CASE("activation at the centers is 1 for both t-norms") {
    const auto r = rule_of({mf(1, 0.3), mf(-2, 4), mf(0, 1)});
    const auto x = vec({1, -2, 0});
    CHECK(activation(r, x, TNorm::minimum) == 1.0);
    CHECK(activation(r, x, TNorm::product) == 1.0);
}

TEST_CASE("memberships (0.5, 0.8) give 0.5 under minimum and 0.4 under product") {
    // Place x so that each membership hits the target exactly: x = c + w*sqrt(-ln g).
    const double w0 = 1.0, w1 = 2.0;
    const float x0 = static_cast<float>(w0 * std::sqrt(-std::log(0.5)));
    const float x1 = static_cast<float>(w1 * std::sqrt(-std::log(0.8)));
    const auto r = rule_of({mf(0, w0), mf(0, w1)});
    const auto x = vec({x0, x1});
    const double g0 = r.memberships[0](x0), g1 = r.memberships[1](x1);
    CHECK(g0 == Approx(0.5).epsilon(1e-6));
    CHECK(g1 == Approx(0.8).epsilon(1e-6));
    CHECK(activation(r, x, TNorm::minimum) == std::min(g0, g1));
    CHECK(activation(r, x, TNorm::product) == g0 * g1);
    CHECK(activation(r, x, TNorm::minimum) == Approx(0.5).epsilon(1e-6));
    CHECK(activation(r, x, TNorm::product) == Approx(0.4).epsilon(1e-6));
}

TEST_CASE("activation never exceeds the smallest membership") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3, 3), w(0.1, 3);
    for (int trial = 0; trial < 200; ++trial) {
        FuzzyRule r;
        std::vector<float> x;
        for (int n = 0; n < 6; ++n) {
            r.memberships.push_back(mf(u(gen), w(gen)));
            x.push_back(static_cast<float>(u(gen)));
        }
        double lowest = 1.0;
        for (int n = 0; n < 6; ++n) lowest = std::min(lowest, r.memberships[n](x[n]));
        CHECK(activation(r, x, TNorm::minimum) <= lowest);
        CHECK(activation(r, x, TNorm::product) <= lowest);
    }
}

TEST_CASE("weak decision thresholds at one half") {
    const auto r = rule_of({mf(0, 1), mf(0, 1)});
    CHECK(weak_decision(r, vec({0, 0}), TNorm::minimum));
    CHECK(weak_decision(r, vec({0, 0}), TNorm::product));
    CHECK_FALSE(weak_decision(r, vec({50, 0}), TNorm::minimum));
    CHECK_FALSE(weak_decision(r, vec({50, 50}), TNorm::product));

    // 0.6 * 0.7 = 0.42: the minimum fires, the product does not.
    const float a = static_cast<float>(std::sqrt(-std::log(0.6)));
    const float b = static_cast<float>(std::sqrt(-std::log(0.7)));
    CHECK(weak_decision(r, vec({a, b}), TNorm::minimum));
    CHECK_FALSE(weak_decision(r, vec({a, b}), TNorm::product));
}

TEST_CASE("a rule fires on every row it was fitted to") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = testutil::random_matrix(gen, 1 + gen() % 10, 1 + gen() % 8, -100, 100);
        const auto r = fit_rule(m);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            CHECK(weak_decision(r, m.row(i), TNorm::minimum));
            CHECK(activation(r, m.row(i), TNorm::minimum) >= 0.5 - 1e-12);
        }
    }
}

TEST_CASE("decision agrees with thresholded activation away from the boundary") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-2, 2), w(0.3, 2);
    for (int trial = 0; trial < 2000; ++trial) {
        FuzzyRule r;
        std::vector<float> x;
        for (int n = 0; n < 3; ++n) {
            r.memberships.push_back(mf(u(gen), w(gen)));
            x.push_back(static_cast<float>(u(gen)));
        }
        for (TNorm t : {TNorm::minimum, TNorm::product}) {
            const double a = activation(r, x, t);
            if (std::abs(a - 0.5) > 1e-9) CHECK(weak_decision(r, x, t) == (a >= 0.5));
        }
    }
}

TEST_CASE("dimension mismatch is reported") {
    const auto r = rule_of({mf(0, 1), mf(0, 1)});
    CHECK(error_of([&] { activation(r, vec({1}), TNorm::minimum); }) ==
          ErrorCode::dimension_mismatch);
    CHECK(error_of([&] { weak_decision(r, vec({1, 2, 3}), TNorm::product); }) ==
          ErrorCode::dimension_mismatch);
}

TEST_CASE("operator names parse") {
    CHECK(parse_tnorm("min") == TNorm::minimum);
    CHECK(parse_tnorm("product") == TNorm::product);
    CHECK(parse_tconorm("max") == TConorm::maximum);
    CHECK(parse_tconorm("probsum") == TConorm::probabilistic_sum);
    CHECK(error_of([] { parse_tnorm("lukasiewicz"); }) == ErrorCode::invalid_argument);
}
