// fuzzyboost command-line front end. Links only the C API.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuzzyboost/fuzzyboost.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitProtocol = 3;

const char* const kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  runtime failure (I/O, corrupt file, training failure), or any file failed in a classify batch\n"
    "  2  usage error: bad flag value, missing input file, unknown or duplicate class\n"
    "  3  protocol violation: train/test leakage, empty split, missing split assignment\n"
    "\n"
    "Results go to stdout or files; structured JSON-lines logs go to stderr.";

struct Failure {
    int exit_code;
};

int exit_code_for(fb_status status) {
    switch (status) {
        case FB_OK: return kExitOk;
        case FB_ERR_INVALID_ARGUMENT:
        case FB_ERR_UNKNOWN_CLASS:
        case FB_ERR_DUPLICATE_CLASS: return kExitUsage;
        case FB_ERR_PROTOCOL: return kExitProtocol;
        default: return kExitFailure;
    }
}

bool g_quiet = false;

void log_json(const nlohmann::json& line) {
    if (g_quiet) return;
    std::fprintf(stderr, "%s\n", line.dump().c_str());
    std::fflush(stderr);
}

void report_error(fb_status status, const std::string& context) {
    std::fprintf(stderr, "fuzzyboost: error: %s: %s: %s\n", context.c_str(), fb_status_name(status),
                 fb_last_error());
}

// Throws Failure on a non-OK status.
void check(fb_status status, const std::string& context) {
    if (status == FB_OK) return;
    report_error(status, context);
    throw Failure{exit_code_for(status)};
}

[[noreturn]] void usage_error(const std::string& message) {
    std::fprintf(stderr, "fuzzyboost: error: %s\n", message.c_str());
    throw Failure{kExitUsage};
}

struct StringDeleter {
    void operator()(char* p) const { fb_string_free(p); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<fb_dataset, HandleDeleter<fb_dataset, fb_dataset_free>>;
using Model = std::unique_ptr<fb_model, HandleDeleter<fb_model, fb_model_free>>;
using Baseline = std::unique_ptr<fb_baseline, HandleDeleter<fb_baseline, fb_baseline_free>>;
using Report = std::unique_ptr<fb_report, HandleDeleter<fb_report, fb_report_free>>;
using Image = std::unique_ptr<fb_image, HandleDeleter<fb_image, fb_image_free>>;

std::string shortest(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
        std::fprintf(stderr, "fuzzyboost: error: cannot write %s\n", path.c_str());
        throw Failure{kExitFailure};
    }
}

// ---- global and shared options ------------------------------------------

struct GlobalOptions {
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct FuzzyOptions {
    std::uint32_t t_max = 50;
    fb_tnorm tnorm = FB_TNORM_MINIMUM;
    fb_tconorm tconorm = FB_TCONORM_MAXIMUM;
    fb_metric metric = FB_METRIC_EUCLIDEAN;
    fb_weight_update weight_update = FB_WEIGHT_UPDATE_BALANCED;
    std::string negatives = "all";
    double sigma_floor_abs = 1e-3;
    double sigma_floor_rel = 1e-6;

    void add_to(CLI::App& app) {
        fb_train_config defaults;
        fb_train_config_default(&defaults);
        t_max = defaults.t_max;
        sigma_floor_abs = defaults.sigma_floor_abs;
        sigma_floor_rel = defaults.sigma_floor_rel;

        app.add_option("--t-max", t_max, "Maximum boosting rounds per class")
            ->check(CLI::Range(1u, 1000000u))
            ->capture_default_str();
        app.add_option("--tnorm", tnorm, "Rule t-norm: min or product")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, fb_tnorm>{{"min", FB_TNORM_MINIMUM},
                                                {"minimum", FB_TNORM_MINIMUM},
                                                {"product", FB_TNORM_PRODUCT}},
                CLI::ignore_case))
            ->default_str("min");
        app.add_option("--tconorm", tconorm,
                       "Aggregation over query descriptors: max or probsum (probsum needs product)")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, fb_tconorm>{{"max", FB_TCONORM_MAXIMUM},
                                                  {"maximum", FB_TCONORM_MAXIMUM},
                                                  {"probsum", FB_TCONORM_PROBABILISTIC_SUM}},
                CLI::ignore_case))
            ->default_str("max");
        app.add_option("--metric", metric, "Descriptor matching distance: euclidean or manhattan")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, fb_metric>{{"euclidean", FB_METRIC_EUCLIDEAN},
                                                 {"manhattan", FB_METRIC_MANHATTAN}},
                CLI::ignore_case))
            ->default_str("euclidean");
        app.add_option("--weight-update", weight_update,
                       "balanced: misclassified mass becomes 1/2 each round; "
                       "correct-only: scale correct samples by exp(-alpha)")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, fb_weight_update>{
                    {"balanced", FB_WEIGHT_UPDATE_BALANCED},
                    {"correct-only", FB_WEIGHT_UPDATE_CORRECT_ONLY}},
                CLI::ignore_case))
            ->default_str("balanced");
        app.add_option("--negatives", negatives,
                       "Negative images per class: all, count:<n>, <n>, fraction:<f>")
            ->capture_default_str();
        app.add_option("--sigma-floor-abs", sigma_floor_abs,
                       "Width floor for zero-spread columns (absolute part)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app.add_option("--sigma-floor-rel", sigma_floor_rel,
                       "Width floor for zero-spread columns (relative to |center|)")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    }

    fb_train_config config(const GlobalOptions& global) const {
        fb_train_config c;
        fb_train_config_default(&c);
        c.t_max = t_max;
        c.tnorm = tnorm;
        c.tconorm = tconorm;
        c.seed = global.seed;
        c.sigma_floor_abs = sigma_floor_abs;
        c.sigma_floor_rel = sigma_floor_rel;
        c.metric = metric;
        c.weight_update = weight_update;
        c.negatives = negatives.c_str();
        c.threads = global.threads;
        return c;
    }

    void validate() const {
        if (tconorm == FB_TCONORM_PROBABILISTIC_SUM && tnorm != FB_TNORM_PRODUCT)
            usage_error("--tconorm probsum requires --tnorm product");
    }
};

struct BaselineOptions {
    std::size_t k = 350;
    double ridge = 1e-2;
    double gamma = 0.0;

    void add_to(CLI::App& app, bool with_k) {
        fb_baseline_config defaults;
        fb_baseline_config_default(&defaults);
        k = defaults.k;
        ridge = defaults.ridge;
        gamma = defaults.gamma;
        if (with_k)
            app.add_option("--k", k, "Baseline dictionary size")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        app.add_option("--ridge", ridge, "Baseline kernel ridge regularizer")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        app.add_option("--gamma", gamma,
                       "Chi-square kernel gamma; 0 = 1 / mean pairwise distance")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    }

    fb_baseline_config config(const GlobalOptions& global) const {
        fb_baseline_config c;
        fb_baseline_config_default(&c);
        c.k = k;
        c.seed = global.seed;
        c.ridge = ridge;
        c.gamma = gamma;
        c.threads = global.threads;
        return c;
    }
};

struct OutputOptions {
    std::string format = "text";
    std::string json_path;
    std::string report_path;

    void add_to(CLI::App& app) {
        app.add_option("--format", format, "stdout format: text or json")
            ->check(CLI::IsMember({"text", "json"}))
            ->capture_default_str();
        app.add_option("--json", json_path, "Also write the JSON report here");
        app.add_option("--report", report_path, "Also write the text report here");
    }

    void emit(const fb_report* report) const {
        char* raw = nullptr;
        check(fb_report_json(report, &raw), "report");
        const OwnedString json(raw);
        check(fb_report_text(report, &raw), "report");
        const OwnedString text(raw);
        if (!json_path.empty()) write_text_file(json_path, std::string(json.get()) + "\n");
        if (!report_path.empty()) write_text_file(report_path, text.get());
        if (format == "json")
            std::printf("%s\n", json.get());
        else
            std::fputs(text.get(), stdout);
        std::fflush(stdout);
    }
};

// ---- helpers over the C API ---------------------------------------------

void progress_to_log(const fb_round_event* event, void*) {
    static const char* const outcomes[] = {"accepted", "perfect", "rejected"};
    log_json({{"event", "round"},
              {"class", event->class_name},
              {"round", event->round},
              {"epsilon", event->epsilon},
              {"alpha", event->alpha},
              {"outcome", outcomes[event->outcome]},
              {"rules", event->rules},
              {"elapsed_s", event->elapsed_seconds}});
}

Dataset load_dataset(const std::string& path, const GlobalOptions& global) {
    fb_dataset* raw = nullptr;
    check(fb_dataset_load(path.c_str(), global.threads, &raw), path);
    Dataset dataset(raw);
    log_json({{"event", "dataset"},
              {"manifest", path},
              {"images", fb_dataset_image_count(raw)},
              {"classes", fb_dataset_class_count(raw)},
              {"io_s", fb_dataset_io_seconds(raw)}});
    return dataset;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// Class names from the --classes flag, checked against the dataset.
std::vector<std::string> resolve_classes(const std::string& flag, const fb_dataset* dataset) {
    std::vector<std::string> known;
    for (size_t i = 0; i < fb_dataset_class_count(dataset); ++i)
        known.emplace_back(fb_dataset_class_name(dataset, i));
    if (flag.empty() || flag == "all") return known;
    auto names = split_list(flag);
    if (names.empty()) usage_error("--classes is empty");
    for (const auto& name : names)
        if (std::find(known.begin(), known.end(), name) == known.end())
            usage_error("unknown class '" + name + "' (not in the manifest)");
    return names;
}

enum class ModelKind { fuzzy, baseline };

ModelKind detect_model_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    if (in.read(magic, 4) && std::string(magic, 4) == "FBBL") return ModelKind::baseline;
    return ModelKind::fuzzy;
}

Model load_model(const std::string& path) {
    fb_model* raw = nullptr;
    check(fb_model_load(path.c_str(), &raw), path);
    return Model(raw);
}

Baseline load_baseline(const std::string& path) {
    fb_baseline* raw = nullptr;
    check(fb_baseline_load(path.c_str(), &raw), path);
    return Baseline(raw);
}

// ---- commands ------------------------------------------------------------

struct SynthCommand {
    std::string out_dir;
    std::string classes = "Bus,Cat,Train";
    std::size_t train_per_class = 30;
    std::size_t test_per_class = 10;
    std::size_t descriptors = 20;
    std::size_t dim = 16;
    double spread = 1.0;
    double separation = 6.0;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "synth", "Write a synthetic Gaussian-cluster dataset (descriptor files and manifest.json)");
        cmd->add_option("--out", out_dir, "Output directory")->required();
        cmd->add_option("--classes", classes, "Comma-separated class names")->capture_default_str();
        cmd->add_option("--train-per-class", train_per_class, "Train images per class")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--test-per-class", test_per_class, "Test images per class")
            ->capture_default_str();
        cmd->add_option("--descriptors", descriptors, "Descriptors per image")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--dim", dim, "Descriptor dimensionality N")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--spread", spread, "Within-class standard deviation")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--separation", separation, "Class mean offset in units of spread")
            ->capture_default_str();
    }

    int run(const GlobalOptions& global) const {
        const auto names = split_list(classes);
        if (names.empty()) usage_error("--classes is empty");
        std::vector<const char*> pointers;
        for (const auto& n : names) pointers.push_back(n.c_str());
        fb_synthetic_spec spec;
        fb_synthetic_spec_default(&spec);
        spec.class_names = pointers.data();
        spec.class_count = pointers.size();
        spec.train_per_class = train_per_class;
        spec.test_per_class = test_per_class;
        spec.descriptors_per_image = descriptors;
        spec.dim = dim;
        spec.spread = spread;
        spec.separation = separation;
        spec.seed = global.seed;
        char* raw = nullptr;
        check(fb_synthetic_write(&spec, out_dir.c_str(), &raw), out_dir);
        const OwnedString path(raw);
        std::printf("%s\n", path.get());
        return kExitOk;
    }
};

struct SplitCommand {
    std::string manifest;
    std::string out;
    double test_frac = 0.15;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "split", "Seeded stratified train/test split of a manifest (input is not modified)");
        cmd->add_option("--manifest", manifest, "Input manifest")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Output manifest")->required();
        cmd->add_option("--test-frac", test_frac, "Fraction of each class held out for testing")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    }

    int run(const GlobalOptions& global) const {
        check(fb_manifest_split(manifest.c_str(), test_frac, global.seed, out.c_str()), manifest);
        std::printf("%s\n", out.c_str());
        return kExitOk;
    }
};

struct TrainCommand {
    std::string manifest;
    std::string out;
    std::string classes = "all";
    std::string method = "fuzzy";
    FuzzyOptions fuzzy;
    BaselineOptions baseline;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "train", "Train on the manifest's train split and write a model file");
        cmd->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Model output path")->required();
        cmd->add_option("--classes", classes, "Comma-separated classes or 'all' (fuzzy only)")
            ->capture_default_str();
        cmd->add_option("--method", method, "fuzzy or bof")
            ->check(CLI::IsMember({"fuzzy", "bof"}))
            ->capture_default_str();
        fuzzy.add_to(*cmd);
        baseline.add_to(*cmd, true);
    }

    int run(const GlobalOptions& global) const {
        fuzzy.validate();
        const Dataset dataset = load_dataset(manifest, global);
        if (method == "bof") {
            const auto config = baseline.config(global);
            fb_baseline* raw = nullptr;
            check(fb_baseline_train(dataset.get(), &config, &raw), "train");
            const Baseline model(raw);
            check(fb_baseline_save(model.get(), out.c_str()), out);
            std::printf("bof k=%zu classes=%zu -> %s\n", baseline.k,
                        fb_baseline_class_count(model.get()), out.c_str());
            return kExitOk;
        }

        const auto names = resolve_classes(classes, dataset.get());
        std::vector<const char*> pointers;
        for (const auto& n : names) pointers.push_back(n.c_str());
        const auto config = fuzzy.config(global);
        fb_model* raw = nullptr;
        check(fb_train(dataset.get(), pointers.data(), pointers.size(), &config, progress_to_log,
                       nullptr, &raw),
              "train");
        const Model model(raw);
        check(fb_model_save(model.get(), out.c_str()), out);
        for (size_t c = 0; c < fb_model_class_count(model.get()); ++c)
            std::printf("%s rules=%zu\n", fb_model_class_name(model.get(), c),
                        fb_model_rule_count(model.get(), c));
        return kExitOk;
    }
};

struct ClassifyCommand {
    std::string model_path;
    std::vector<std::string> files;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "classify",
            "Classify descriptor files. One line per file: id class Name=score ... [tie].\n"
            "A failing file is reported on stderr and the batch continues (exit 1).");
        cmd->add_option("--model", model_path, "Fuzzy (FBMD) or baseline (FBBL) model")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("files", files, "Descriptor files (FBDS binary or CSV)")->required();
    }

    int run(const GlobalOptions&) const {
        const ModelKind kind = detect_model_kind(model_path);
        Model model;
        Baseline baseline;
        size_t dim = 0;
        std::vector<std::string> names;
        if (kind == ModelKind::baseline) {
            baseline = load_baseline(model_path);
            for (size_t c = 0; c < fb_baseline_class_count(baseline.get()); ++c)
                names.emplace_back(fb_baseline_class_name(baseline.get(), c));
        } else {
            model = load_model(model_path);
            dim = fb_model_dim(model.get());
            for (size_t c = 0; c < fb_model_class_count(model.get()); ++c)
                names.emplace_back(fb_model_class_name(model.get(), c));
        }

        int exit_code = kExitOk;
        std::vector<double> scores(names.size());
        for (const auto& file : files) {
            fb_image* raw = nullptr;
            fb_status status = fb_image_read(file.c_str(), dim, &raw);
            const Image image(raw);
            size_t best = 0;
            bool tie = false;
            if (status == FB_OK) {
                if (kind == ModelKind::baseline) {
                    status = fb_baseline_classify(baseline.get(), image.get(), scores.data(),
                                                  scores.size(), &best);
                } else {
                    fb_classification result{};
                    status = fb_classify(model.get(), image.get(), scores.data(), scores.size(),
                                         &result);
                    best = result.best;
                    tie = result.tie != 0;
                }
            }
            if (status != FB_OK) {
                report_error(status, file);
                exit_code = kExitFailure;
                continue;
            }
            std::string line = std::string(fb_image_id(image.get())) + " " + names[best];
            for (size_t c = 0; c < names.size(); ++c)
                line += " " + names[c] + "=" + shortest(scores[c]);
            if (tie) line += " tie";
            std::printf("%s\n", line.c_str());
        }
        std::fflush(stdout);
        return exit_code;
    }
};

struct EvaluateCommand {
    std::string manifest;
    std::string model_path;
    std::string method = "fuzzy";
    std::string save_model;
    FuzzyOptions fuzzy;
    BaselineOptions baseline;
    OutputOptions output;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "evaluate",
            "Evaluate on the test split. With --model, score that model; otherwise train on the\n"
            "train split first and report learning time too.");
        cmd->add_option("--manifest", manifest, "Dataset manifest with train/test splits")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--model", model_path, "Existing fuzzy or baseline model")
            ->check(CLI::ExistingFile);
        cmd->add_option("--method", method, "Method to train when --model is absent: fuzzy or bof")
            ->check(CLI::IsMember({"fuzzy", "bof"}))
            ->capture_default_str();
        cmd->add_option("--save-model", save_model, "Write the freshly trained model here");
        fuzzy.add_to(*cmd);
        baseline.add_to(*cmd, true);
        output.add_to(*cmd);
    }

    int run(const GlobalOptions& global) const {
        fuzzy.validate();
        const Dataset dataset = load_dataset(manifest, global);
        fb_report* raw = nullptr;
        if (!model_path.empty()) {
            if (detect_model_kind(model_path) == ModelKind::baseline) {
                const Baseline model = load_baseline(model_path);
                check(fb_evaluate_baseline(model.get(), dataset.get(), global.threads, &raw),
                      "evaluate");
            } else {
                const Model model = load_model(model_path);
                check(fb_evaluate_model(model.get(), dataset.get(), global.threads, &raw),
                      "evaluate");
            }
        } else if (method == "bof") {
            const auto config = baseline.config(global);
            fb_baseline* trained = nullptr;
            check(fb_run_baseline(dataset.get(), &config, &raw, save_model.empty() ? nullptr : &trained),
                  "evaluate");
            const Baseline owned(trained);
            if (owned) check(fb_baseline_save(owned.get(), save_model.c_str()), save_model);
        } else {
            const auto config = fuzzy.config(global);
            fb_model* trained = nullptr;
            check(fb_run_fuzzyboost(dataset.get(), &config, progress_to_log, nullptr, &raw,
                                    save_model.empty() ? nullptr : &trained),
                  "evaluate");
            const Model owned(trained);
            if (owned) check(fb_model_save(owned.get(), save_model.c_str()), save_model);
        }
        const Report report(raw);
        output.emit(report.get());
        return kExitOk;
    }
};

struct BenchmarkCommand {
    std::string manifest;
    std::vector<std::size_t> ks{200, 250, 300, 350, 400};
    std::size_t reference_k = 350;
    FuzzyOptions fuzzy;
    BaselineOptions baseline;
    OutputOptions output;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "benchmark",
            "Fuzzyboost against the bag-of-features baseline over a dictionary-size sweep.\n"
            "Prints one baseline table per K, the fuzzyboost table and the speed ratios.");
        cmd->add_option("--manifest", manifest, "Dataset manifest with train/test splits")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--ks", ks, "Comma-separated dictionary sizes")
            ->delimiter(',')
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--reference-k", reference_k,
                        "Dictionary size used for the headline speed ratio")
            ->capture_default_str();
        fuzzy.add_to(*cmd);
        baseline.add_to(*cmd, false);
        output.add_to(*cmd);
    }

    int run(const GlobalOptions& global) const {
        fuzzy.validate();
        if (ks.empty()) usage_error("--ks is empty");
        const Dataset dataset = load_dataset(manifest, global);
        const auto config = fuzzy.config(global);
        const auto base_config = baseline.config(global);
        fb_report* raw = nullptr;
        check(fb_benchmark(dataset.get(), &config, ks.data(), ks.size(), &base_config, reference_k,
                           progress_to_log, nullptr, &raw),
              "benchmark");
        const Report report(raw);
        output.emit(report.get());
        return kExitOk;
    }
};

struct AddClassCommand {
    std::string model_path;
    std::string out;
    std::string class_name;
    std::string donor_path;
    std::string manifest;
    FuzzyOptions fuzzy;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "addclass",
            "Append one class to a fuzzy model. Existing ensembles are copied unchanged.\n"
            "Take the class from another model (--from) or train it (--manifest).");
        cmd->add_option("--model", model_path, "Base model")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Output model path")->required();
        cmd->add_option("--class", class_name, "Class to add")->required();
        auto* from = cmd->add_option("--from", donor_path, "Model that already holds the class")
                         ->check(CLI::ExistingFile);
        auto* m = cmd->add_option("--manifest", manifest, "Dataset to train the class on")
                      ->check(CLI::ExistingFile);
        from->excludes(m);
        m->excludes(from);
        fuzzy.add_to(*cmd);
    }

    int run(const GlobalOptions& global) const {
        if (donor_path.empty() == manifest.empty()) usage_error("addclass needs --from or --manifest");
        fuzzy.validate();
        const Model base = load_model(model_path);
        fb_model* raw = nullptr;
        if (!donor_path.empty()) {
            const Model donor = load_model(donor_path);
            check(fb_model_add_class(base.get(), donor.get(), class_name.c_str(), &raw), "addclass");
        } else {
            const Dataset dataset = load_dataset(manifest, global);
            resolve_classes(class_name, dataset.get());
            const auto config = fuzzy.config(global);
            check(fb_model_add_trained_class(base.get(), dataset.get(), class_name.c_str(), &config,
                                             progress_to_log, nullptr, &raw),
                  "addclass");
        }
        const Model model(raw);
        check(fb_model_save(model.get(), out.c_str()), out);
        for (size_t c = 0; c < fb_model_class_count(model.get()); ++c)
            std::printf("%s rules=%zu\n", fb_model_class_name(model.get(), c),
                        fb_model_rule_count(model.get(), c));
        return kExitOk;
    }
};

struct ExportCommand {
    std::string model_path;

    void add_to(CLI::App& app) {
        auto* cmd = app.add_subcommand("export", "Print a fuzzy model's rules as readable text");
        cmd->add_option("--model", model_path, "Fuzzy model")->required()->check(CLI::ExistingFile);
    }

    int run(const GlobalOptions&) const {
        const Model model = load_model(model_path);
        char* raw = nullptr;
        check(fb_model_export_text(model.get(), &raw), model_path);
        const OwnedString text(raw);
        std::fputs(text.get(), stdout);
        return kExitOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuzzyboost: boosted fuzzy-rule image classifier over local-feature descriptors"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(fb_version()));
    app.set_config("--config", "", "TOML or INI config file; command-line flags take precedence");

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Seed for every random choice")
        ->capture_default_str();
    app.add_option("--threads", global.threads, "Worker thread cap; 0 = all cores")
        ->capture_default_str();
    app.add_flag("-q,--quiet", g_quiet, "Suppress the JSON-lines log on stderr");

    SynthCommand synth;
    SplitCommand split;
    TrainCommand train;
    ClassifyCommand classify;
    EvaluateCommand evaluate;
    BenchmarkCommand bench;
    AddClassCommand addclass;
    ExportCommand exporter;
    synth.add_to(app);
    split.add_to(app);
    train.add_to(app);
    classify.add_to(app);
    evaluate.add_to(app);
    bench.add_to(app);
    addclass.add_to(app);
    exporter.add_to(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("synth")) return synth.run(global);
        if (app.got_subcommand("split")) return split.run(global);
        if (app.got_subcommand("train")) return train.run(global);
        if (app.got_subcommand("classify")) return classify.run(global);
        if (app.got_subcommand("evaluate")) return evaluate.run(global);
        if (app.got_subcommand("benchmark")) return bench.run(global);
        if (app.got_subcommand("addclass")) return addclass.run(global);
        if (app.got_subcommand("export")) return exporter.run(global);
    } catch (const Failure& f) {
        return f.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fuzzyboost: error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
