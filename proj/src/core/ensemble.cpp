#include "core/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"

namespace fuzzyboost {

namespace {

void check_query(const QueryDescriptors& query, std::size_t dim) {
    if (query.empty()) fail(ErrorCode::empty_input, "query has no descriptors");
    if (query.dim() != dim)
        fail(ErrorCode::dimension_mismatch,
             "query dimensionality " + std::to_string(query.dim()) +
                 " does not match model dimensionality " + std::to_string(dim));
}

// min t-norm, max t-conorm. A descriptor whose running minimum cannot beat
// the best activation so far is abandoned; a full activation of 1 saturates.
double score_min_max(const FuzzyRule& rule, const QueryDescriptors& query) {
    const std::size_t dim = rule.dim();
    double best = 0.0;
    for (std::size_t j = 0; j < query.rows(); ++j) {
        const auto x = query.row(j);
        double running = 1.0;
        std::size_t n = 0;
        for (; n < dim; ++n) {
            running = std::min(running, rule.memberships[n](x[n]));
            if (running <= best) break;
        }
        if (n == dim) {
            best = running;
            if (best >= 1.0) break;
        }
    }
    return best;
}

double score_product_max(const FuzzyRule& rule, const QueryDescriptors& query) {
    const std::size_t dim = rule.dim();
    double best = 0.0;
    for (std::size_t j = 0; j < query.rows(); ++j) {
        const auto x = query.row(j);
        double running = 1.0;
        std::size_t n = 0;
        for (; n < dim; ++n) {
            running *= rule.memberships[n](x[n]);
            if (running <= best) break;
        }
        if (n == dim) {
            best = running;
            if (best >= 1.0) break;
        }
    }
    return best;
}

// S(a, b) = a + b - ab folded over descriptors: 1 - prod_j (1 - a_j).
double score_probabilistic_sum(const FuzzyRule& rule, const QueryDescriptors& query,
                               TNorm tnorm) {
    double complement = 1.0;
    for (std::size_t j = 0; j < query.rows(); ++j) {
        complement *= 1.0 - activation_unchecked(rule, query.row(j), tnorm);
        if (complement == 0.0) break;
    }
    return 1.0 - complement;
}

}  // namespace

void ClassEnsemble::validate() const {
    if (class_name.empty()) fail(ErrorCode::invalid_argument, "ensemble has an empty class name");
    if (rules.empty())
        fail(ErrorCode::empty_input, "ensemble '" + class_name + "' has no rules");
    if (dim == 0) fail(ErrorCode::invalid_argument, "ensemble '" + class_name + "' has N = 0");
    if (tconorm == TConorm::probabilistic_sum && tnorm != TNorm::product)
        fail(ErrorCode::invalid_argument,
             "ensemble '" + class_name + "': probabilistic sum requires the product t-norm");
    double total = 0.0;
    for (const auto& rule : rules) {
        if (rule.dim() != dim)
            fail(ErrorCode::dimension_mismatch,
                 "ensemble '" + class_name + "' mixes rule dimensionalities");
        if (!(rule.importance >= 0.0) || !std::isfinite(rule.importance))
            fail(ErrorCode::numeric, "ensemble '" + class_name + "' has an invalid importance");
        for (const auto& mf : rule.memberships)
            if (!std::isfinite(mf.center) || !(mf.width > 0.0) || !std::isfinite(mf.width))
                fail(ErrorCode::numeric,
                     "ensemble '" + class_name + "' has an invalid membership function");
        total += rule.importance;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(ErrorCode::numeric, "ensemble '" + class_name + "' importances sum to " +
                                     std::to_string(total) + ", expected 1");
}

const ClassEnsemble* MultiClassModel::find(std::string_view name) const {
    for (const auto& e : ensembles)
        if (e.class_name == name) return &e;
    return nullptr;
}

void MultiClassModel::validate() const {
    std::set<std::string_view> names;
    for (const auto& e : ensembles) {
        e.validate();
        if (!names.insert(e.class_name).second)
            fail(ErrorCode::duplicate_class, "class '" + e.class_name + "' appears twice in model");
        if (e.dim != dim())
            fail(ErrorCode::dimension_mismatch,
                 "ensemble '" + e.class_name + "' has N=" + std::to_string(e.dim) +
                     ", model has N=" + std::to_string(dim()));
    }
}

double score_rule(const FuzzyRule& rule, const QueryDescriptors& query, TNorm tnorm,
                  TConorm tconorm) {
    check_query(query, rule.dim());
    if (tconorm == TConorm::probabilistic_sum) return score_probabilistic_sum(rule, query, tnorm);
    return tnorm == TNorm::minimum ? score_min_max(rule, query) : score_product_max(rule, query);
}

double score_class(const ClassEnsemble& ensemble, const QueryDescriptors& query) {
    check_query(query, ensemble.dim);
    double h = 0.0;
    for (const auto& rule : ensemble.rules)
        h += rule.importance * score_rule(rule, query, ensemble.tnorm, ensemble.tconorm);
    return h;
}

Classification classify(const MultiClassModel& model, const QueryDescriptors& query) {
    if (model.ensembles.empty()) fail(ErrorCode::empty_input, "model has no classes");
    check_query(query, model.dim());

    Classification result;
    result.scores.reserve(model.class_count());
    for (const auto& ensemble : model.ensembles)
        result.scores.push_back(score_class(ensemble, query));

    const double top = *std::max_element(result.scores.begin(), result.scores.end());
    std::size_t winners = 0;
    for (std::size_t c = 0; c < result.scores.size(); ++c) {
        if (result.scores[c] != top) continue;
        if (winners == 0 ||
            model.ensembles[c].class_name < model.ensembles[result.best].class_name)
            result.best = c;
        ++winners;
    }
    result.tie = winners > 1;
    result.class_name = model.ensembles[result.best].class_name;
    return result;
}

MultiClassModel add_class(const MultiClassModel& model, ClassEnsemble ensemble) {
    ensemble.validate();
    if (model.find(ensemble.class_name))
        fail(ErrorCode::duplicate_class,
             "class '" + ensemble.class_name + "' already exists in the model");
    if (!model.ensembles.empty() && ensemble.dim != model.dim())
        fail(ErrorCode::dimension_mismatch,
             "new class '" + ensemble.class_name + "' has N=" + std::to_string(ensemble.dim) +
                 ", model has N=" + std::to_string(model.dim()));
    MultiClassModel out = model;
    out.ensembles.push_back(std::move(ensemble));
    return out;
}

}  // namespace fuzzyboost
