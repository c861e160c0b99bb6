#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/boosting.hpp"
#include "core/bof.hpp"
#include "core/dataset.hpp"
#include "core/ensemble.hpp"

namespace fuzzyboost {

struct ClassRow {
    std::string name;
    std::size_t test_images = 0;
    std::size_t correct = 0;
    double accuracy_pct = 0.0;
    double testing_seconds = 0.0;
    std::optional<std::size_t> positive_train_images;
    std::optional<std::size_t> negative_train_images;
};

struct EvalReport {
    std::string method;                          // "fuzzyboost" or "bof-chi2"
    std::optional<std::size_t> dictionary_size;  // baseline only
    std::vector<ClassRow> rows;
    std::size_t total_test = 0;
    std::size_t total_correct = 0;
    double total_accuracy_pct = 0.0;
    std::optional<double> learning_seconds;      // overall, all classes
    double testing_seconds = 0.0;                // sum of per-class testing time
    double testing_wall_seconds = 0.0;
    double io_seconds = 0.0;                     // descriptor loading, reported separately
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted], rows order
    std::string config_digest;
    std::string config;
    std::vector<std::string> notes;
};

// Hard error if any image id or descriptor file is listed in both splits.
void check_no_leakage(const DatasetManifest& manifest);

// Classifies every test image once. Learning time is left unset.
EvalReport evaluate_model(const MultiClassModel& model, const Dataset& dataset,
                          unsigned threads = 0);
EvalReport evaluate_baseline(const BaselineModel& model, const Dataset& dataset,
                             unsigned threads = 0);

// Train on the train split, then evaluate; learning time measured around training.
EvalReport run_fuzzyboost(const Dataset& dataset, const TrainConfig& config,
                          const ProgressSink& progress = {},
                          MultiClassModel* trained = nullptr);
EvalReport run_baseline(const Dataset& dataset, const BaselineConfig& config,
                        BaselineModel* trained = nullptr);

struct SpeedRatio {
    std::size_t k = 0;
    double train_ratio = 0.0;  // baseline LT / fuzzyboost LT
    double test_ratio = 0.0;   // baseline / fuzzyboost wall-clock test pass
    double total_ratio = 0.0;  // baseline (LT+TT) / fuzzyboost (LT+TT), wall clock
    double fuzzy_total_seconds = 0.0;
    double baseline_total_seconds = 0.0;
};

struct BenchmarkReport {
    EvalReport fuzzy;
    std::vector<EvalReport> baselines;
    std::vector<SpeedRatio> ratios;
    std::size_t reference_k = 350;
};

BenchmarkReport benchmark(const Dataset& dataset, const TrainConfig& fuzzy_config,
                          const std::vector<std::size_t>& ks, const BaselineConfig& baseline_config,
                          std::size_t reference_k = 350, const ProgressSink& progress = {});

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
std::string benchmark_to_json(const BenchmarkReport& report);
std::string benchmark_to_text(const BenchmarkReport& report);

}  // namespace fuzzyboost
