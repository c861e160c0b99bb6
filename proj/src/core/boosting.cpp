#include "core/boosting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace fuzzyboost {

namespace {

constexpr std::size_t kDecisionBlock = 4096;

std::vector<std::uint8_t> decide_all(const FuzzyRule& rule, const LabeledDescriptors& data,
                                     TNorm tnorm, unsigned threads) {
    std::vector<std::uint8_t> correct(data.size());
    const std::size_t blocks = (data.size() + kDecisionBlock - 1) / kDecisionBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t end = std::min(data.size(), (b + 1) * kDecisionBlock);
        for (std::size_t l = b * kDecisionBlock; l < end; ++l) {
            const bool fired = weak_decision_unchecked(rule, data.rows.row(l), tnorm);
            correct[l] = static_cast<std::uint8_t>(fired == (data.labels[l] != 0));
        }
    });
    return correct;
}

double weighted_error(std::span<const double> weights, std::span<const std::uint8_t> correct) {
    double eps = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!correct[l]) eps += weights[l];
    return eps;
}

std::size_t nearest_in(DescriptorView seed, const ImageDescriptors& image, DistanceMetric metric) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < image.count(); ++k) {
        const double d = distance(seed, image.descriptors.row(k), metric);
        if (d < best_dist) {
            best_dist = d;
            best = k;
        }
    }
    return best;
}

DescriptorMatrix match_rows(DescriptorView seed, std::span<const ImageHandle> positives,
                            DistanceMetric metric, unsigned threads) {
    if (positives.empty()) fail(ErrorCode::empty_input, "match_per_image: no positive images");
    for (const auto& image : positives)
        if (image->dim() != seed.size())
            fail(ErrorCode::dimension_mismatch,
                 "match_per_image: image '" + image->image_id + "' has N=" +
                     std::to_string(image->dim()) + ", seed has N=" +
                     std::to_string(seed.size()));

    std::vector<std::size_t> nearest(positives.size());
    parallel_for(positives.size(), threads, [&](std::size_t i) {
        nearest[i] = nearest_in(seed, *positives[i], metric);
    });

    DescriptorMatrix matched(seed.size());
    matched.reserve_rows(positives.size());
    for (std::size_t i = 0; i < positives.size(); ++i)
        matched.append(positives[i]->descriptors.row(nearest[i]));
    return matched;
}

}  // namespace

const char* to_string(DistanceMetric m) {
    return m == DistanceMetric::euclidean ? "euclidean" : "manhattan";
}

const char* to_string(WeightUpdate w) {
    return w == WeightUpdate::balanced ? "balanced" : "correct_only";
}

const char* to_string(RoundOutcome o) {
    switch (o) {
        case RoundOutcome::accepted: return "accepted";
        case RoundOutcome::perfect: return "perfect";
        case RoundOutcome::rejected: return "rejected";
    }
    return "accepted";
}

DistanceMetric parse_metric(std::string_view text) {
    if (text == "euclidean") return DistanceMetric::euclidean;
    if (text == "manhattan") return DistanceMetric::manhattan;
    fail(ErrorCode::invalid_argument, "unknown distance metric '" + std::string(text) + "'");
}

WeightUpdate parse_weight_update(std::string_view text) {
    if (text == "balanced") return WeightUpdate::balanced;
    if (text == "correct_only") return WeightUpdate::correct_only;
    fail(ErrorCode::invalid_argument, "unknown weight update '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
    if (t_max < 1) fail(ErrorCode::invalid_argument, "t_max must be >= 1");
    if (!(sigma_floor.abs > 0.0) || !std::isfinite(sigma_floor.abs) ||
        !(sigma_floor.rel >= 0.0) || !std::isfinite(sigma_floor.rel))
        fail(ErrorCode::invalid_argument, "sigma floor must be positive and finite");
    if (tconorm == TConorm::probabilistic_sum && tnorm != TNorm::product)
        fail(ErrorCode::invalid_argument, "probabilistic sum requires the product t-norm");
}

namespace {

std::string shortest(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

}  // namespace

std::string TrainConfig::describe() const {
    std::ostringstream out;
    out << "t_max=" << t_max << "\n"
        << "tnorm=" << to_string(tnorm) << "\n"
        << "tconorm=" << to_string(tconorm) << "\n"
        << "seed=" << seed << "\n"
        << "sigma_floor_abs=" << shortest(sigma_floor.abs) << "\n"
        << "sigma_floor_rel=" << shortest(sigma_floor.rel) << "\n"
        << "metric=" << to_string(metric) << "\n"
        << "weight_update=" << to_string(weight_update) << "\n"
        << "negatives=" << negatives.to_string() << "\n";
    return out.str();
}

std::string TrainConfig::digest() const {
    static constexpr char hex[] = "0123456789abcdef";
    std::uint64_t h = fnv1a64(describe());
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    return out;
}

LabeledDescriptors flatten(const LearningSet& set) {
    const std::size_t dim = set.dim();
    LabeledDescriptors data;
    data.rows = DescriptorMatrix(dim);
    data.rows.reserve_rows(set.positive_descriptor_count() + set.negative_descriptor_count());
    for (const auto& image : set.positives) {
        data.image_begin.push_back(data.rows.rows());
        for (std::size_t k = 0; k < image->count(); ++k) data.rows.append(image->descriptors.row(k));
    }
    data.image_begin.push_back(data.rows.rows());
    data.positive_count = data.rows.rows();
    for (const auto& image : set.negatives)
        for (std::size_t k = 0; k < image->count(); ++k) data.rows.append(image->descriptors.row(k));
    data.labels.assign(data.rows.rows(), 0);
    std::fill_n(data.labels.begin(), data.positive_count, std::uint8_t{1});
    return data;
}

std::vector<double> init_weights(std::size_t count) {
    if (count == 0) fail(ErrorCode::empty_input, "init_weights: learning set is empty");
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

std::size_t sample_positive(std::span<const double> weights, std::size_t positive_count,
                            Rng& rng) {
    if (positive_count == 0 || positive_count > weights.size())
        fail(ErrorCode::invalid_argument, "sample_positive: invalid positive count");
    double total = 0.0;
    for (std::size_t l = 0; l < positive_count; ++l) total += weights[l];
    if (!(total > 0.0)) fail(ErrorCode::numeric, "sample_positive: all positive weights are zero");

    const double target = rng.uniform01() * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t l = 0; l < positive_count; ++l) {
        if (weights[l] <= 0.0) continue;
        cumulative += weights[l];
        last_positive = l;
        if (target < cumulative) return l;
    }
    // Rounding can leave target a hair above the accumulated sum.
    return last_positive;
}

double distance(DescriptorView a, DescriptorView b, DistanceMetric metric) {
    double acc = 0.0;
    if (metric == DistanceMetric::euclidean) {
        for (std::size_t n = 0; n < a.size(); ++n) {
            const double d = double(a[n]) - double(b[n]);
            acc += d * d;
        }
        return acc;  // squared; ordering is all that matters
    }
    for (std::size_t n = 0; n < a.size(); ++n) acc += std::abs(double(a[n]) - double(b[n]));
    return acc;
}

DescriptorMatrix match_per_image(DescriptorView seed, std::span<const ImageHandle> positives,
                                 DistanceMetric metric) {
    return match_rows(seed, positives, metric, 1);
}

double evaluate_error(const FuzzyRule& rule, const LabeledDescriptors& data,
                      std::span<const double> weights, TNorm tnorm) {
    if (weights.size() != data.size())
        fail(ErrorCode::dimension_mismatch, "evaluate_error: weight count does not match L");
    if (data.rows.dim() != rule.dim())
        fail(ErrorCode::dimension_mismatch, "evaluate_error: rule dimensionality mismatch");
    return weighted_error(weights, decide_all(rule, data, tnorm, 1));
}

std::vector<double> update_weights(std::span<const double> weights,
                                   std::span<const std::uint8_t> correct, double alpha) {
    if (!std::isfinite(alpha)) fail(ErrorCode::numeric, "update_weights: alpha is not finite");
    if (weights.size() != correct.size())
        fail(ErrorCode::dimension_mismatch, "update_weights: size mismatch");
    const double shrink = std::exp(-alpha);
    std::vector<double> next(weights.size());
    double total = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        next[l] = correct[l] ? weights[l] * shrink : weights[l];
        total += next[l];
    }
    if (!(total > 0.0)) fail(ErrorCode::numeric, "update_weights: weights vanished");
    for (double& w : next) w /= total;
    return next;
}

double compute_alpha(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
        fail(ErrorCode::numeric,
             "compute_alpha: error " + std::to_string(epsilon) + " outside (0, 0.5)");
    return 0.5 * std::log((1.0 - epsilon) / epsilon);
}

double alpha_cap(std::size_t learning_count) {
    if (learning_count < 2) fail(ErrorCode::invalid_argument, "alpha_cap: need L >= 2");
    return compute_alpha(1.0 / (2.0 * static_cast<double>(learning_count)));
}

ClassTrainer::ClassTrainer(const LearningSet& set, const TrainConfig& config, unsigned threads)
    : class_name_(set.target_class),
      config_(config),
      threads_(threads),
      positives_(set.positives),
      data_(flatten(set)),
      rng_(config.seed, "boost/" + set.target_class) {
    config_.validate();
    if (data_.positive_count == 0 || data_.positive_count == data_.size())
        fail(ErrorCode::empty_input,
             "class '" + class_name_ + "' needs both positive and negative descriptors");
    state_.weights = init_weights(data_.size());
}

std::optional<RoundRecord> ClassTrainer::step() {
    if (state_.finished) return std::nullopt;
    if (state_.round >= config_.t_max) {
        state_.finished = true;
        return std::nullopt;
    }

    RoundRecord record;
    record.round = ++state_.round;
    record.seed_row = sample_positive(state_.weights, data_.positive_count, rng_);
    const DescriptorMatrix matched =
        match_rows(data_.rows.row(record.seed_row), positives_, config_.metric, threads_);
    record.rule = fit_rule(matched, config_.sigma_floor);
    record.correct = decide_all(record.rule, data_, config_.tnorm, threads_);
    record.epsilon = weighted_error(state_.weights, record.correct);

    if (record.epsilon == 0.0) {
        record.outcome = RoundOutcome::perfect;
        record.alpha = alpha_cap(data_.size());
        record.rule.raw_alpha = record.alpha;
        state_.rules.push_back(record.rule);
        state_.finished = true;
    } else if (record.epsilon >= 0.5) {
        // Worse than chance: discarded, and training stops.
        record.outcome = RoundOutcome::rejected;
        state_.finished = true;
    } else {
        record.outcome = RoundOutcome::accepted;
        record.alpha = compute_alpha(record.epsilon);
        record.rule.raw_alpha = record.alpha;
        state_.rules.push_back(record.rule);
        const double exponent = config_.weight_update == WeightUpdate::balanced
                                    ? 2.0 * record.alpha
                                    : record.alpha;
        state_.weights = update_weights(state_.weights, record.correct, exponent);
    }
    if (state_.round >= config_.t_max) state_.finished = true;
    return record;
}

ClassEnsemble ClassTrainer::finish() const {
    if (state_.rules.empty())
        fail(ErrorCode::training_failed,
             "class '" + class_name_ + "': first round was worse than chance, no rule accepted");
    ClassEnsemble ensemble;
    ensemble.class_name = class_name_;
    ensemble.dim = data_.rows.dim();
    ensemble.tnorm = config_.tnorm;
    ensemble.tconorm = config_.tconorm;
    ensemble.rules = state_.rules;
    double total = 0.0;
    for (const auto& rule : ensemble.rules) total += rule.raw_alpha;
    for (auto& rule : ensemble.rules) rule.importance = rule.raw_alpha / total;
    return ensemble;
}

ClassEnsemble train_class(const LearningSet& set, const TrainConfig& config,
                          const ProgressSink& progress, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    ClassTrainer trainer(set, config, threads);
    while (auto record = trainer.step()) {
        if (!progress) continue;
        RoundEvent event;
        event.class_name = set.target_class;
        event.round = record->round;
        event.epsilon = record->epsilon;
        event.alpha = record->alpha;
        event.outcome = record->outcome;
        event.rules = trainer.state().rules.size();
        event.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        progress(event);
    }
    return trainer.finish();
}

ClassEnsemble train_class(const Dataset& dataset, std::string_view target_class,
                          const TrainConfig& config, const ProgressSink& progress) {
    const LearningSet set =
        assemble_learning_set(dataset, target_class, config.negatives, config.seed);
    return train_class(set, config, progress, resolve_threads(config.threads));
}

MultiClassModel train_model(const Dataset& dataset, std::span<const std::string> classes,
                            const TrainConfig& config, const ProgressSink& progress) {
    config.validate();
    validate_manifest(dataset.manifest(), true);
    std::vector<std::string> targets(classes.begin(), classes.end());
    if (targets.empty()) targets = dataset.manifest().classes;

    std::set<std::string_view> seen;
    for (const auto& name : targets) {
        if (!dataset.manifest().has_class(name))
            fail(ErrorCode::unknown_class, "class '" + name + "' is not in the manifest");
        if (!seen.insert(name).second)
            fail(ErrorCode::duplicate_class, "class '" + name + "' requested twice");
    }

    std::mutex sink_mutex;
    ProgressSink serialized;
    if (progress) {
        serialized = [&](const RoundEvent& e) {
            std::lock_guard lock(sink_mutex);
            progress(e);
        };
    }

    const unsigned threads = resolve_threads(config.threads);
    const unsigned outer = std::min<unsigned>(threads, static_cast<unsigned>(targets.size()));
    const unsigned inner = std::max(1u, threads / std::max(1u, outer));

    std::vector<ClassEnsemble> ensembles(targets.size());
    parallel_for(targets.size(), outer, [&](std::size_t i) {
        const LearningSet set =
            assemble_learning_set(dataset, targets[i], config.negatives, config.seed);
        ensembles[i] = train_class(set, config, serialized, inner);
    });

    MultiClassModel model;
    model.ensembles = std::move(ensembles);
    model.metadata.seed = config.seed;
    model.metadata.config_digest = config.digest();
    model.metadata.config = config.describe();
    model.validate();
    return model;
}

}  // namespace fuzzyboost
