#include "core/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <string_view>

#include <json.hpp>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace fuzzyboost {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct TestOutcome {
    std::size_t predicted = 0;
    double seconds = 0.0;
};

std::vector<std::size_t> test_indices(const Dataset& dataset) {
    check_no_leakage(dataset.manifest());
    auto test = dataset.select(Split::test);
    if (test.empty()) fail(ErrorCode::protocol_violation, "test split is empty");
    return test;
}

// Shared aggregation once every test image has a predicted class index.
EvalReport aggregate(const Dataset& dataset, const std::vector<std::string>& classes,
                     const std::vector<std::size_t>& test,
                     const std::vector<TestOutcome>& outcomes) {
    const auto& manifest = dataset.manifest();
    EvalReport report;
    report.rows.resize(classes.size());
    report.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
    for (std::size_t c = 0; c < classes.size(); ++c) {
        report.rows[c].name = classes[c];
        report.rows[c].positive_train_images = dataset.select(Split::train, classes[c]).size();
    }

    for (std::size_t t = 0; t < test.size(); ++t) {
        const auto& label = manifest.images[test[t]].class_label;
        const auto c = static_cast<std::size_t>(
            std::find(classes.begin(), classes.end(), label) - classes.begin());
        ClassRow& row = report.rows[c];
        ++row.test_images;
        row.testing_seconds += outcomes[t].seconds;
        ++report.confusion[c][outcomes[t].predicted];
        if (outcomes[t].predicted == c) ++row.correct;
    }
    for (auto& row : report.rows) {
        row.accuracy_pct =
            row.test_images ? 100.0 * double(row.correct) / double(row.test_images) : 0.0;
        report.total_test += row.test_images;
        report.total_correct += row.correct;
        report.testing_seconds += row.testing_seconds;
    }
    report.total_accuracy_pct = 100.0 * double(report.total_correct) / double(report.total_test);
    return report;
}

void require_classes(const Dataset& dataset, const std::vector<std::size_t>& test,
                     const std::vector<std::string>& classes) {
    for (std::size_t i : test) {
        const auto& label = dataset.manifest().images[i].class_label;
        if (std::find(classes.begin(), classes.end(), label) == classes.end())
            fail(ErrorCode::unknown_class,
                 "test image '" + dataset.manifest().images[i].id + "' has class '" + label +
                     "' which the model does not know");
    }
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string lpad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

ordered_json report_json(const EvalReport& r) {
    ordered_json j;
    j["method"] = r.method;
    j["dictionary_size"] = r.dictionary_size ? ordered_json(*r.dictionary_size) : ordered_json();
    j["config_digest"] = r.config_digest;
    j["config"] = r.config;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json jr;
        jr["class"] = row.name;
        jr["positive_train_images"] =
            row.positive_train_images ? ordered_json(*row.positive_train_images) : ordered_json();
        jr["negative_train_images"] =
            row.negative_train_images ? ordered_json(*row.negative_train_images) : ordered_json();
        jr["test_images"] = row.test_images;
        jr["correct"] = row.correct;
        jr["accuracy_pct"] = row.accuracy_pct;
        jr["testing_seconds"] = row.testing_seconds;
        rows.push_back(std::move(jr));
    }
    j["classes"] = std::move(rows);
    ordered_json total;
    total["test_images"] = r.total_test;
    total["correct"] = r.total_correct;
    total["accuracy_pct"] = r.total_accuracy_pct;
    total["learning_seconds"] = r.learning_seconds ? ordered_json(*r.learning_seconds) : ordered_json();
    total["testing_seconds"] = r.testing_seconds;
    total["testing_wall_seconds"] = r.testing_wall_seconds;
    total["io_seconds"] = r.io_seconds;
    j["total"] = std::move(total);
    ordered_json names = ordered_json::array();
    for (const auto& row : r.rows) names.push_back(row.name);
    j["confusion"] = {{"classes", names}, {"matrix", r.confusion}};
    j["notes"] = r.notes;
    return j;
}

// Lines whose key starts with `skip` are left out.
std::string config_block(const EvalReport& r, std::string_view skip = {}) {
    std::string out;
    if (!r.config_digest.empty()) out += "# config digest: " + r.config_digest + "\n";
    std::size_t start = 0;
    while (start < r.config.size()) {
        const std::size_t end = r.config.find('\n', start);
        const std::string line = r.config.substr(start, end - start);
        if (!line.empty() && (skip.empty() || !line.starts_with(skip))) out += "#   " + line + "\n";
        if (end == std::string::npos) break;
        start = end + 1;
    }
    for (const auto& note : r.notes) out += "# note: " + note + "\n";
    return out;
}

std::string bof_block(const EvalReport& r) {
    std::string out;
    const std::string k = r.dictionary_size ? std::to_string(*r.dictionary_size) : "?";
    out += pad("", 10) + "Dictionary size: " + k + "\n";
    out += pad("", 10) + lpad("CQ", 10) + lpad("LT", 12) + lpad("TT", 12) + "\n";
    for (const auto& row : r.rows)
        out += pad(row.name, 10) + lpad(fmt("%.2f%%", row.accuracy_pct), 10) + lpad("", 12) +
               lpad(fmt("%.3f", row.testing_seconds), 12) + "\n";
    out += pad("Total", 10) + lpad(fmt("%.2f%%", r.total_accuracy_pct), 10) +
           lpad(r.learning_seconds ? fmt("%.3f", *r.learning_seconds) : "", 12) +
           lpad(fmt("%.3f", r.testing_seconds), 12) + "\n";
    return out;
}

std::string fuzzy_table(const EvalReport& r) {
    std::string out;
    out += pad("", 10) + lpad("Positive", 10) + lpad("Negative", 10) + lpad("Accuracy", 10) +
           lpad("LT [s]", 12) + lpad("TT [s]", 12) + "\n";
    std::size_t pos_total = 0, neg_total = 0;
    bool neg_known = true;
    for (const auto& row : r.rows) {
        const std::string pos = row.positive_train_images ? std::to_string(*row.positive_train_images) : "-";
        const std::string neg = row.negative_train_images ? std::to_string(*row.negative_train_images) : "-";
        pos_total += row.positive_train_images.value_or(0);
        neg_total += row.negative_train_images.value_or(0);
        neg_known = neg_known && row.negative_train_images.has_value();
        out += pad(row.name, 10) + lpad(pos, 10) + lpad(neg, 10) +
               lpad(fmt("%.2f%%", row.accuracy_pct), 10) + lpad("", 12) +
               lpad(fmt("%.3f", row.testing_seconds), 12) + "\n";
    }
    out += pad("Total", 10) + lpad(std::to_string(pos_total), 10) +
           lpad(neg_known ? std::to_string(neg_total) : "-", 10) +
           lpad(fmt("%.2f%%", r.total_accuracy_pct), 10) +
           lpad(r.learning_seconds ? fmt("%.3f", *r.learning_seconds) : "-", 12) +
           lpad(fmt("%.3f", r.testing_seconds), 12) + "\n";
    return out;
}

std::string confusion_block(const EvalReport& r) {
    std::string out = "Confusion matrix (rows: true class, columns: predicted)\n";
    out += pad("", 10);
    for (const auto& row : r.rows) out += lpad(row.name, 10);
    out += "\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        out += pad(r.rows[i].name, 10);
        for (std::size_t v : r.confusion[i]) out += lpad(std::to_string(v), 10);
        out += "\n";
    }
    return out;
}

const char* kBaselineNote =
    "chi-square kernel classifier solved as one-vs-rest kernel ridge regression "
    "(regularized least squares), not an SMO-trained SVM";
const char* kTimingNote =
    "TT sums per-image classification time; descriptor file I/O is excluded and reported as io_seconds";

}  // namespace

void check_no_leakage(const DatasetManifest& manifest) {
    std::map<std::string, Split> ids;
    std::map<std::filesystem::path, Split> files;
    for (const auto& image : manifest.images) {
        if (image.split == Split::unassigned)
            fail(ErrorCode::protocol_violation, "image '" + image.id + "' has no split assignment");
        auto [id_it, id_new] = ids.emplace(image.id, image.split);
        if (!id_new && id_it->second != image.split)
            fail(ErrorCode::protocol_violation,
                 "test-split leakage: image '" + image.id + "' appears in train and test");
        const auto file = manifest.resolve(image).lexically_normal();
        auto [f_it, f_new] = files.emplace(file, image.split);
        if (!f_new && f_it->second != image.split)
            fail(ErrorCode::protocol_violation,
                 "test-split leakage: descriptor file '" + file.string() + "' used in train and test");
    }
}

EvalReport evaluate_model(const MultiClassModel& model, const Dataset& dataset, unsigned threads) {
    const auto test = test_indices(dataset);
    std::vector<std::string> classes;
    for (const auto& e : model.ensembles) classes.push_back(e.class_name);
    require_classes(dataset, test, classes);

    std::vector<TestOutcome> outcomes(test.size());
    const auto wall = Clock::now();
    parallel_for(test.size(), threads, [&](std::size_t t) {
        const auto start = Clock::now();
        outcomes[t].predicted = classify(model, dataset.image(test[t])->descriptors).best;
        outcomes[t].seconds = seconds_since(start);
    });
    const double wall_seconds = seconds_since(wall);

    EvalReport report = aggregate(dataset, classes, test, outcomes);
    report.method = "fuzzyboost";
    report.testing_wall_seconds = wall_seconds;
    report.config_digest = model.metadata.config_digest;
    report.config = model.metadata.config;
    report.notes.push_back(kTimingNote);
    return report;
}

EvalReport evaluate_baseline(const BaselineModel& model, const Dataset& dataset, unsigned threads) {
    const auto test = test_indices(dataset);
    require_classes(dataset, test, model.classes);

    std::vector<TestOutcome> outcomes(test.size());
    const auto wall = Clock::now();
    parallel_for(test.size(), threads, [&](std::size_t t) {
        const auto start = Clock::now();
        outcomes[t].predicted = classify_baseline(model, *dataset.image(test[t])).best;
        outcomes[t].seconds = seconds_since(start);
    });
    const double wall_seconds = seconds_since(wall);

    EvalReport report = aggregate(dataset, model.classes, test, outcomes);
    report.method = "bof-chi2";
    report.dictionary_size = model.dictionary.size();
    report.testing_wall_seconds = wall_seconds;
    char config[160];
    std::snprintf(config, sizeof config, "k=%zu\nseed=%llu\ngamma=%.17g\nridge=%.17g\n",
                  model.dictionary.size(), static_cast<unsigned long long>(model.seed),
                  model.gamma, model.ridge);
    report.config = config;
    report.notes.push_back(kBaselineNote);
    report.notes.push_back(kTimingNote);
    return report;
}

EvalReport run_fuzzyboost(const Dataset& dataset, const TrainConfig& config,
                          const ProgressSink& progress, MultiClassModel* trained) {
    check_no_leakage(dataset.manifest());
    const auto start = Clock::now();
    MultiClassModel model = train_model(dataset, {}, config, progress);
    const double learning = seconds_since(start);

    EvalReport report = evaluate_model(model, dataset, config.threads);
    report.learning_seconds = learning;
    for (auto& row : report.rows) {
        const LearningSet set = assemble_learning_set(dataset, row.name, config.negatives, config.seed);
        row.positive_train_images = set.positives.size();
        row.negative_train_images = set.negatives.size();
    }
    if (trained) *trained = std::move(model);
    return report;
}

EvalReport run_baseline(const Dataset& dataset, const BaselineConfig& config,
                        BaselineModel* trained) {
    check_no_leakage(dataset.manifest());
    const auto start = Clock::now();
    BaselineModel model = train_baseline(dataset, config);
    const double learning = seconds_since(start);

    EvalReport report = evaluate_baseline(model, dataset, config.threads);
    report.learning_seconds = learning;
    if (trained) *trained = std::move(model);
    return report;
}

BenchmarkReport benchmark(const Dataset& dataset, const TrainConfig& fuzzy_config,
                          const std::vector<std::size_t>& ks, const BaselineConfig& baseline_config,
                          std::size_t reference_k, const ProgressSink& progress) {
    if (ks.empty()) fail(ErrorCode::invalid_argument, "benchmark needs at least one dictionary size");
    check_no_leakage(dataset.manifest());

    BenchmarkReport report;
    report.reference_k = reference_k;
    report.fuzzy = run_fuzzyboost(dataset, fuzzy_config, progress);
    const double fuzzy_lt = report.fuzzy.learning_seconds.value_or(0.0);
    const double fuzzy_tt = report.fuzzy.testing_wall_seconds;

    for (std::size_t k : ks) {
        BaselineConfig cfg = baseline_config;
        cfg.k = k;
        EvalReport baseline = run_baseline(dataset, cfg);
        const double lt = baseline.learning_seconds.value_or(0.0);
        const double tt = baseline.testing_wall_seconds;

        SpeedRatio ratio;
        ratio.k = k;
        ratio.train_ratio = lt / fuzzy_lt;
        ratio.test_ratio = tt / fuzzy_tt;
        ratio.fuzzy_total_seconds = fuzzy_lt + fuzzy_tt;
        ratio.baseline_total_seconds = lt + tt;
        ratio.total_ratio = ratio.baseline_total_seconds / ratio.fuzzy_total_seconds;
        report.ratios.push_back(ratio);
        report.baselines.push_back(std::move(baseline));
    }
    return report;
}

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(2) + "\n"; }

std::string report_to_text(const EvalReport& report) {
    std::string out = "# method: " + report.method + "\n" + config_block(report);
    out += report.method == "fuzzyboost" ? fuzzy_table(report) : bof_block(report);
    out += "\n" + confusion_block(report);
    out += fmt("descriptor I/O: %.3f s\n", report.io_seconds);
    return out;
}

std::string benchmark_to_json(const BenchmarkReport& report) {
    ordered_json j;
    j["fuzzyboost"] = report_json(report.fuzzy);
    ordered_json baselines = ordered_json::array();
    for (const auto& b : report.baselines) baselines.push_back(report_json(b));
    j["baselines"] = std::move(baselines);
    ordered_json ratios = ordered_json::array();
    for (const auto& r : report.ratios) {
        ordered_json jr;
        jr["k"] = r.k;
        jr["train_ratio"] = r.train_ratio;
        jr["test_ratio"] = r.test_ratio;
        jr["total_ratio"] = r.total_ratio;
        jr["fuzzy_total_seconds"] = r.fuzzy_total_seconds;
        jr["baseline_total_seconds"] = r.baseline_total_seconds;
        ratios.push_back(std::move(jr));
    }
    j["ratios"] = std::move(ratios);
    j["reference_k"] = report.reference_k;
    return j.dump(2) + "\n";
}

std::string benchmark_to_text(const BenchmarkReport& report) {
    std::string out;
    out += "== Bag-of-features + chi-square kernel baseline ==\n";
    if (!report.baselines.empty()) out += config_block(report.baselines.front(), "k=");
    for (const auto& b : report.baselines) out += bof_block(b);
    out += "\n== Boosted fuzzy rules ==\n" + config_block(report.fuzzy) + fuzzy_table(report.fuzzy);
    out += "\n== Speed (baseline time / fuzzyboost time) ==\n";
    out += "# wall-clock LT plus wall-clock test pass; fuzzyboost LT+TT = " +
           fmt("%.3f s", report.ratios.empty() ? 0.0 : report.ratios.front().fuzzy_total_seconds) +
           "\n";
    out += pad("K", 8) + lpad("train", 10) + lpad("test", 10) + lpad("total", 10) +
           lpad("BoF LT+TT", 12) + lpad("saved LT", 10) + lpad("saved TT", 10) + "\n";
    for (const auto& r : report.ratios) {
        std::string k = std::to_string(r.k);
        if (r.k == report.reference_k) k += "*";
        out += pad(k, 8) + lpad(fmt("%.2fx", r.train_ratio), 10) + lpad(fmt("%.2fx", r.test_ratio), 10) +
               lpad(fmt("%.2fx", r.total_ratio), 10) +
               lpad(fmt("%.3f s", r.baseline_total_seconds), 12) +
               lpad(fmt("%.0f%%", 100.0 * (1.0 - 1.0 / r.train_ratio)), 10) +
               lpad(fmt("%.0f%%", 100.0 * (1.0 - 1.0 / r.test_ratio)), 10) + "\n";
    }
    out += "(* reference dictionary size)\n";
    out += fmt("descriptor I/O: %.3f s\n", report.fuzzy.io_seconds);
    return out;
}

}  // namespace fuzzyboost
