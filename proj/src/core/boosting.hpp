#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/dataset.hpp"
#include "core/ensemble.hpp"
#include "core/fuzzy_rule.hpp"
#include "core/rng.hpp"

namespace fuzzyboost {

enum class DistanceMetric { euclidean, manhattan };

// How a round reweights correctly classified descriptors.
//   balanced:     D * exp(-2 alpha), after which misclassified and correctly
//                 classified descriptors each carry half the mass (the usual
//                 AdaBoost exp(-alpha * y * h) update).
//   correct_only: D * exp(-alpha), the single-sided form.
enum class WeightUpdate { balanced, correct_only };

const char* to_string(DistanceMetric m);
const char* to_string(WeightUpdate w);
DistanceMetric parse_metric(std::string_view text);
WeightUpdate parse_weight_update(std::string_view text);

struct TrainConfig {
    std::size_t t_max = 50;
    TNorm tnorm = TNorm::minimum;
    TConorm tconorm = TConorm::maximum;
    std::uint64_t seed = 0;
    SigmaFloor sigma_floor;
    DistanceMetric metric = DistanceMetric::euclidean;
    WeightUpdate weight_update = WeightUpdate::balanced;
    NegativePolicy negatives;
    unsigned threads = 0;  // 0 = all cores; never affects results

    void validate() const;
    // Canonical key=value lines of every result-affecting field.
    std::string describe() const;
    // 16 hex digits of FNV-1a over describe().
    std::string digest() const;
};

// All descriptors of one learning set: positives first, then negatives.
struct LabeledDescriptors {
    DescriptorMatrix rows;
    std::vector<std::uint8_t> labels;          // y^l: 1 positive, 0 negative
    std::size_t positive_count = 0;            // L_pos
    std::vector<std::size_t> image_begin;      // first row of each positive image, plus end

    std::size_t size() const { return labels.size(); }  // L
};

LabeledDescriptors flatten(const LearningSet& set);

// D_1^l = 1/L.
std::vector<double> init_weights(std::size_t count);

// Draws index r in [0, positive_count) with probability D^r / sum_{l<L_pos} D^l.
std::size_t sample_positive(std::span<const double> weights, std::size_t positive_count,
                            Rng& rng);

// Row i is the descriptor of positive image i nearest to `seed`; ties keep
// the lowest descriptor index.
DescriptorMatrix match_per_image(DescriptorView seed, std::span<const ImageHandle> positives,
                                 DistanceMetric metric);

double distance(DescriptorView a, DescriptorView b, DistanceMetric metric);

// epsilon = sum_l D^l * I(h(x^l) != y^l).
double evaluate_error(const FuzzyRule& rule, const LabeledDescriptors& data,
                      std::span<const double> weights, TNorm tnorm);

// D^l * exp(-alpha * I(correct_l)) / C with C restoring unit sum.
std::vector<double> update_weights(std::span<const double> weights,
                                   std::span<const std::uint8_t> correct, double alpha);

// 0.5 * ln((1 - eps) / eps) for eps in (0, 0.5).
double compute_alpha(double epsilon);

// Importance granted to a perfect rule: compute_alpha(1 / (2L)).
double alpha_cap(std::size_t learning_count);

enum class RoundOutcome { accepted, perfect, rejected };

const char* to_string(RoundOutcome o);

struct RoundRecord {
    std::size_t round = 0;      // 1-based
    std::size_t seed_row = 0;   // index into LabeledDescriptors::rows
    double epsilon = 0.0;
    double alpha = 0.0;         // 0 when rejected
    RoundOutcome outcome = RoundOutcome::accepted;
    FuzzyRule rule;
    std::vector<std::uint8_t> correct;  // I(h = y) per descriptor
};

struct RoundEvent {
    std::string class_name;
    std::size_t round = 0;
    double epsilon = 0.0;
    double alpha = 0.0;
    RoundOutcome outcome = RoundOutcome::accepted;
    std::size_t rules = 0;
    double elapsed_seconds = 0.0;
};

using ProgressSink = std::function<void(const RoundEvent&)>;

struct BoostState {
    std::vector<double> weights;  // D_t over positives then negatives
    std::size_t round = 0;        // completed rounds
    std::vector<FuzzyRule> rules; // accepted rules, raw_alpha set
    bool finished = false;
};

// Per-class boosting loop. Rounds are sequential; one trainer is not safe for
// concurrent use.
class ClassTrainer {
public:
    ClassTrainer(const LearningSet& set, const TrainConfig& config, unsigned threads = 1);

    // One sample -> match -> fit -> evaluate -> reweight round. Returns
    // nullopt once training has stopped.
    std::optional<RoundRecord> step();

    const BoostState& state() const { return state_; }
    const LabeledDescriptors& data() const { return data_; }

    // Normalizes importances (beta_t = alpha_t / sum alpha). Throws
    // training_failed when no rule was accepted.
    ClassEnsemble finish() const;

private:
    std::string class_name_;
    TrainConfig config_;
    unsigned threads_;
    std::vector<ImageHandle> positives_;
    LabeledDescriptors data_;
    BoostState state_;
    Rng rng_;
};

ClassEnsemble train_class(const LearningSet& set, const TrainConfig& config,
                          const ProgressSink& progress = {}, unsigned threads = 1);

ClassEnsemble train_class(const Dataset& dataset, std::string_view target_class,
                          const TrainConfig& config, const ProgressSink& progress = {});

// Trains the listed classes (all manifest classes when empty) concurrently.
// Ensembles follow the order of `classes`, or manifest order.
MultiClassModel train_model(const Dataset& dataset, std::span<const std::string> classes,
                            const TrainConfig& config, const ProgressSink& progress = {});

}  // namespace fuzzyboost
