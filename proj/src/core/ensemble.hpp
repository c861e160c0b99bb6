#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/descriptors.hpp"
#include "core/fuzzy_rule.hpp"

namespace fuzzyboost {

// Strong classifier for one class: importance-weighted fuzzy rules.
struct ClassEnsemble {
    std::string class_name;
    std::size_t dim = 0;
    TNorm tnorm = TNorm::minimum;
    TConorm tconorm = TConorm::maximum;
    std::vector<FuzzyRule> rules;

    // Non-empty, consistent dimensionality, importances >= 0 summing to 1
    // within 1e-9, supported operator pair.
    void validate() const;

    friend bool operator==(const ClassEnsemble&, const ClassEnsemble&) = default;
};

struct ModelMetadata {
    std::uint64_t seed = 0;
    std::string config_digest;
    std::string config;  // effective training configuration, key=value lines

    friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct MultiClassModel {
    std::vector<ClassEnsemble> ensembles;
    ModelMetadata metadata;

    std::size_t dim() const { return ensembles.empty() ? 0 : ensembles.front().dim; }
    std::size_t class_count() const { return ensembles.size(); }
    const ClassEnsemble* find(std::string_view name) const;

    // Unique class names, shared dimensionality, each ensemble valid.
    void validate() const;

    friend bool operator==(const MultiClassModel&, const MultiClassModel&) = default;
};

// The query image: u descriptors of dimensionality N.
using QueryDescriptors = DescriptorMatrix;

// F_t(Q): t-conorm over query descriptors of the rule activation.
double score_rule(const FuzzyRule& rule, const QueryDescriptors& query, TNorm tnorm,
                  TConorm tconorm);

// H^c(Q) = sum_t beta_t * F_t(Q).
double score_class(const ClassEnsemble& ensemble, const QueryDescriptors& query);

struct Classification {
    std::size_t best = 0;             // index into model.ensembles
    std::string class_name;
    std::vector<double> scores;       // H^c per ensemble, model order
    bool tie = false;                 // more than one class reached the top score
};

// argmax_c H^c(Q); exact ties go to the lexicographically smallest name.
Classification classify(const MultiClassModel& model, const QueryDescriptors& query);

// Appends an ensemble; existing ensembles are copied untouched.
MultiClassModel add_class(const MultiClassModel& model, ClassEnsemble ensemble);

}  // namespace fuzzyboost
