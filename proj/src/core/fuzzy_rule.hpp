#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "core/descriptors.hpp"

namespace fuzzyboost {

struct GaussianMF {
    double center = 0.0;
    double width = 1.0;

    // exp(-((x - center) / width)^2)
    double operator()(double x) const {
        const double z = (x - center) / width;
        return std::exp(-(z * z));
    }

    friend bool operator==(const GaussianMF&, const GaussianMF&) = default;
};

inline double membership(const GaussianMF& mf, double x) { return mf(x); }

enum class TNorm { minimum, product };
enum class TConorm { maximum, probabilistic_sum };

const char* to_string(TNorm t);
const char* to_string(TConorm s);
TNorm parse_tnorm(std::string_view text);
TConorm parse_tconorm(std::string_view text);

// Width substituted for columns whose matched values are all equal:
// max(abs, rel * |center|).
struct SigmaFloor {
    double abs = 1e-3;
    double rel = 1e-6;

    double at(double center) const { return std::max(abs, rel * std::abs(center)); }
};

// One weak classifier: IF x_1 is G_1 AND ... AND x_N is G_N.
struct FuzzyRule {
    std::vector<GaussianMF> memberships;
    double importance = 0.0;  // normalized over the owning ensemble
    double raw_alpha = 0.0;

    std::size_t dim() const { return memberships.size(); }

    friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

// Fits the Gaussian sets to the column ranges of `matched` (one row per
// positive image): center at the midpoint, width so that membership is exactly
// 0.5 at both column extremes. Importance is left for the trainer.
FuzzyRule fit_rule(const DescriptorMatrix& matched, const SigmaFloor& floor = {});

// T-norm of the N membership values. Throws dimension_mismatch.
double activation(const FuzzyRule& rule, DescriptorView x, TNorm tnorm);

// h_t(x): 1 iff activation >= 1/2. The minimum t-norm path stops scanning as
// soon as one membership drops below 1/2.
bool weak_decision(const FuzzyRule& rule, DescriptorView x, TNorm tnorm);

// Unchecked variants for inner loops where dimensionality is established.
double activation_unchecked(const FuzzyRule& rule, DescriptorView x, TNorm tnorm);
bool weak_decision_unchecked(const FuzzyRule& rule, DescriptorView x, TNorm tnorm);

}  // namespace fuzzyboost
