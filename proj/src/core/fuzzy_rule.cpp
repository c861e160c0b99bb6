#include "core/fuzzy_rule.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "core/error.hpp"

namespace fuzzyboost {

namespace {

// A matched extreme sits at membership 0.5 exactly in real arithmetic; its
// computed value can land an ulp or two either side. Decisions accept that
// band so every rule fires on the rows it was fitted to.
constexpr double kFireThreshold = 0.5 - 1e-12;

const double kHalfWidthDivisor = 2.0 * std::sqrt(-std::log(0.5));

void check_dim(const FuzzyRule& rule, DescriptorView x) {
    if (x.size() != rule.dim())
        throw Error(ErrorCode::dimension_mismatch,
                    "descriptor of length " + std::to_string(x.size()) +
                        " evaluated against a rule of dimensionality " +
                        std::to_string(rule.dim()));
}

}  // namespace

const char* to_string(TNorm t) { return t == TNorm::minimum ? "minimum" : "product"; }

const char* to_string(TConorm s) {
    return s == TConorm::maximum ? "maximum" : "probabilistic_sum";
}

TNorm parse_tnorm(std::string_view text) {
    if (text == "minimum" || text == "min") return TNorm::minimum;
    if (text == "product" || text == "prod") return TNorm::product;
    fail(ErrorCode::invalid_argument, "unknown t-norm '" + std::string(text) + "'");
}

TConorm parse_tconorm(std::string_view text) {
    if (text == "maximum" || text == "max") return TConorm::maximum;
    if (text == "probabilistic_sum" || text == "probsum") return TConorm::probabilistic_sum;
    fail(ErrorCode::invalid_argument, "unknown t-conorm '" + std::string(text) + "'");
}

FuzzyRule fit_rule(const DescriptorMatrix& matched, const SigmaFloor& floor) {
    if (matched.empty()) fail(ErrorCode::empty_input, "fit_rule: matched matrix has no rows");
    const std::size_t dim = matched.dim();
    const std::size_t rows = matched.rows();

    FuzzyRule rule;
    rule.memberships.resize(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r) {
            const double v = matched.row(r)[n];
            if (!std::isfinite(v))
                fail(ErrorCode::non_finite_value,
                     "fit_rule: non-finite value at row " + std::to_string(r));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double spread = std::abs(lo - hi);
        GaussianMF& mf = rule.memberships[n];
        mf.center = hi - spread / 2.0;
        mf.width = spread > 0.0 ? spread / kHalfWidthDivisor : floor.at(mf.center);
    }
    return rule;
}

double activation_unchecked(const FuzzyRule& rule, DescriptorView x, TNorm tnorm) {
    const std::size_t dim = rule.dim();
    if (tnorm == TNorm::minimum) {
        double result = 1.0;
        for (std::size_t n = 0; n < dim; ++n) result = std::min(result, rule.memberships[n](x[n]));
        return result;
    }
    double result = 1.0;
    for (std::size_t n = 0; n < dim; ++n) result *= rule.memberships[n](x[n]);
    return result;
}

bool weak_decision_unchecked(const FuzzyRule& rule, DescriptorView x, TNorm tnorm) {
    // Both t-norms are non-increasing as factors are added, so the scan can
    // stop once the running value falls under the threshold.
    const std::size_t dim = rule.dim();
    double running = 1.0;
    for (std::size_t n = 0; n < dim; ++n) {
        const double g = rule.memberships[n](x[n]);
        running = tnorm == TNorm::minimum ? std::min(running, g) : running * g;
        if (running < kFireThreshold) return false;
    }
    return true;
}

double activation(const FuzzyRule& rule, DescriptorView x, TNorm tnorm) {
    check_dim(rule, x);
    return activation_unchecked(rule, x, tnorm);
}

bool weak_decision(const FuzzyRule& rule, DescriptorView x, TNorm tnorm) {
    check_dim(rule, x);
    return weak_decision_unchecked(rule, x, tnorm);
}

}  // namespace fuzzyboost
