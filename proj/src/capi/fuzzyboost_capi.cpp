#include "fuzzyboost/fuzzyboost.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "core/boosting.hpp"
#include "core/bof.hpp"
#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/model_io.hpp"
#include "core/synthetic.hpp"

namespace fb = fuzzyboost;

struct fb_image {
    fb::ImageDescriptors image;
};

struct fb_dataset {
    fb::Dataset dataset;
    double io_seconds = 0.0;
};

struct fb_model {
    fb::MultiClassModel model;
};

struct fb_baseline {
    fb::BaselineModel model;
};

struct fb_report {
    std::variant<fb::EvalReport, fb::BenchmarkReport> report;
};

namespace {

thread_local std::string last_error;

fb_status set_error(fb_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Runs body, translating exceptions into status codes.
template <typename Body>
fb_status guarded(Body&& body) noexcept {
    try {
        body();
        return FB_OK;
    } catch (const fb::Error& e) {
        return set_error(static_cast<fb_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(FB_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(FB_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(FB_ERR_INTERNAL, "unknown exception");
    }
}

void require(const void* p, const char* what) {
    if (!p) fb::fail(fb::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

fb::TrainConfig to_core(const fb_train_config* config) {
    fb::TrainConfig out;
    if (!config) return out;
    out.t_max = config->t_max;
    if (config->tnorm != FB_TNORM_MINIMUM && config->tnorm != FB_TNORM_PRODUCT)
        fb::fail(fb::ErrorCode::invalid_argument, "unknown t-norm code");
    if (config->tconorm != FB_TCONORM_MAXIMUM && config->tconorm != FB_TCONORM_PROBABILISTIC_SUM)
        fb::fail(fb::ErrorCode::invalid_argument, "unknown t-conorm code");
    out.tnorm = static_cast<fb::TNorm>(config->tnorm);
    out.tconorm = static_cast<fb::TConorm>(config->tconorm);
    out.seed = config->seed;
    out.sigma_floor.abs = config->sigma_floor_abs;
    out.sigma_floor.rel = config->sigma_floor_rel;
    out.metric = config->metric == FB_METRIC_MANHATTAN ? fb::DistanceMetric::manhattan
                                                       : fb::DistanceMetric::euclidean;
    out.weight_update = config->weight_update == FB_WEIGHT_UPDATE_CORRECT_ONLY
                            ? fb::WeightUpdate::correct_only
                            : fb::WeightUpdate::balanced;
    out.negatives = fb::NegativePolicy::parse(config->negatives ? config->negatives : "all");
    out.threads = config->threads;
    out.validate();
    return out;
}

fb::BaselineConfig to_core(const fb_baseline_config* config) {
    fb::BaselineConfig out;
    if (!config) return out;
    out.k = config->k;
    out.seed = config->seed;
    out.ridge = config->ridge;
    out.gamma = config->gamma;
    out.threads = config->threads;
    if (!(out.ridge >= 0.0)) fb::fail(fb::ErrorCode::invalid_argument, "ridge must be >= 0");
    return out;
}

fb::ProgressSink to_sink(fb_progress_fn progress, void* user) {
    if (!progress) return {};
    return [progress, user](const fb::RoundEvent& e) {
        fb_round_event event{};
        event.class_name = e.class_name.c_str();
        event.round = e.round;
        event.epsilon = e.epsilon;
        event.alpha = e.alpha;
        event.outcome = static_cast<fb_round_outcome>(e.outcome);
        event.rules = e.rules;
        event.elapsed_seconds = e.elapsed_seconds;
        progress(&event, user);
    };
}

}  // namespace

extern "C" {

const char* fb_version(void) { return "1.0.0"; }

const char* fb_status_name(fb_status status) {
    if (status == FB_OK) return "ok";
    return fb::to_string(static_cast<fb::ErrorCode>(status));
}

const char* fb_last_error(void) { return last_error.c_str(); }

void fb_string_free(char* text) { std::free(text); }

fb_status fb_image_read(const char* path, size_t expected_dim, fb_image** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new fb_image{fb::read_descriptor_file(path, expected_dim)};
    });
}

fb_status fb_image_create(const char* image_id, const float* values, size_t count, size_t dim,
                          fb_image** out) {
    return guarded([&] {
        require(values, "values");
        require(out, "out");
        fb::ImageDescriptors image;
        image.image_id = image_id ? image_id : "";
        image.descriptors = fb::DescriptorMatrix(dim, std::vector<float>(values, values + count * dim));
        fb::validate_image(image, 0, image.image_id);
        *out = new fb_image{std::move(image)};
    });
}

fb_status fb_image_write(const fb_image* image, const char* path) {
    return guarded([&] {
        require(image, "image");
        require(path, "path");
        fb::write_descriptor_file(image->image, path);
    });
}

size_t fb_image_count(const fb_image* image) { return image ? image->image.count() : 0; }
size_t fb_image_dim(const fb_image* image) { return image ? image->image.dim() : 0; }
const char* fb_image_id(const fb_image* image) {
    return image ? image->image.image_id.c_str() : "";
}
const float* fb_image_values(const fb_image* image) {
    return image ? image->image.descriptors.values().data() : nullptr;
}
void fb_image_free(fb_image* image) { delete image; }

fb_status fb_dataset_load(const char* manifest_path, unsigned threads, fb_dataset** out) {
    return guarded([&] {
        require(manifest_path, "manifest_path");
        require(out, "out");
        const auto start = std::chrono::steady_clock::now();
        auto manifest = fb::load_manifest(manifest_path);
        auto dataset = fb::Dataset::load(manifest, threads);
        const double io =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        *out = new fb_dataset{std::move(dataset), io};
    });
}

size_t fb_dataset_class_count(const fb_dataset* dataset) {
    return dataset ? dataset->dataset.manifest().classes.size() : 0;
}

const char* fb_dataset_class_name(const fb_dataset* dataset, size_t index) {
    if (!dataset || index >= dataset->dataset.manifest().classes.size()) return nullptr;
    return dataset->dataset.manifest().classes[index].c_str();
}

size_t fb_dataset_image_count(const fb_dataset* dataset) {
    return dataset ? dataset->dataset.size() : 0;
}

double fb_dataset_io_seconds(const fb_dataset* dataset) {
    return dataset ? dataset->io_seconds : 0.0;
}

void fb_dataset_free(fb_dataset* dataset) { delete dataset; }

fb_status fb_manifest_split(const char* in_path, double test_fraction, uint64_t seed,
                            const char* out_path) {
    return guarded([&] {
        require(in_path, "in_path");
        require(out_path, "out_path");
        const auto manifest = fb::load_manifest(in_path);
        auto split = fb::stratified_split(manifest, test_fraction, seed);
        // Keep relative paths valid from the output location.
        const auto out_dir = std::filesystem::absolute(std::filesystem::path(out_path)).parent_path();
        for (auto& image : split.images) {
            if (image.path.is_relative())
                image.path = std::filesystem::relative(
                    std::filesystem::absolute(manifest.resolve(image)), out_dir);
        }
        fb::save_manifest(split, out_path);
    });
}

void fb_synthetic_spec_default(fb_synthetic_spec* spec) {
    if (!spec) return;
    const fb::SyntheticSpec defaults;
    *spec = fb_synthetic_spec{};
    spec->class_names = nullptr;
    spec->class_count = 0;
    spec->train_per_class = defaults.train_per_class;
    spec->test_per_class = defaults.test_per_class;
    spec->descriptors_per_image = defaults.descriptors_per_image;
    spec->dim = defaults.dim;
    spec->spread = defaults.spread;
    spec->separation = defaults.separation;
    spec->seed = defaults.seed;
}

fb_status fb_synthetic_write(const fb_synthetic_spec* spec, const char* dir, char** manifest_path) {
    return guarded([&] {
        require(spec, "spec");
        require(dir, "dir");
        fb::SyntheticSpec core;
        if (spec->class_names) {
            core.classes.clear();
            for (size_t i = 0; i < spec->class_count; ++i) {
                require(spec->class_names[i], "class name");
                core.classes.emplace_back(spec->class_names[i]);
            }
        }
        core.train_per_class = spec->train_per_class;
        core.test_per_class = spec->test_per_class;
        core.descriptors_per_image = spec->descriptors_per_image;
        core.dim = spec->dim;
        core.spread = spec->spread;
        core.separation = spec->separation;
        core.seed = spec->seed;
        const auto path = fb::write_synthetic(core, dir);
        if (manifest_path) *manifest_path = dup_string(path.string());
    });
}

void fb_train_config_default(fb_train_config* config) {
    if (!config) return;
    const fb::TrainConfig defaults;
    *config = fb_train_config{};
    config->t_max = static_cast<uint32_t>(defaults.t_max);
    config->tnorm = FB_TNORM_MINIMUM;
    config->tconorm = FB_TCONORM_MAXIMUM;
    config->seed = defaults.seed;
    config->sigma_floor_abs = defaults.sigma_floor.abs;
    config->sigma_floor_rel = defaults.sigma_floor.rel;
    config->metric = FB_METRIC_EUCLIDEAN;
    config->weight_update = FB_WEIGHT_UPDATE_BALANCED;
    config->negatives = nullptr;
    config->threads = 0;
}

fb_status fb_train(const fb_dataset* dataset, const char* const* classes, size_t class_count,
                   const fb_train_config* config, fb_progress_fn progress, void* user,
                   fb_model** out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        std::vector<std::string> names;
        for (size_t i = 0; i < class_count; ++i) {
            require(classes[i], "class name");
            names.emplace_back(classes[i]);
        }
        auto model = fb::train_model(dataset->dataset, names, to_core(config), to_sink(progress, user));
        *out = new fb_model{std::move(model)};
    });
}

fb_status fb_model_load(const char* path, fb_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new fb_model{fb::load_model(path)};
    });
}

fb_status fb_model_save(const fb_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        fb::save_model(model->model, path);
    });
}

void fb_model_free(fb_model* model) { delete model; }

size_t fb_model_class_count(const fb_model* model) { return model ? model->model.class_count() : 0; }

const char* fb_model_class_name(const fb_model* model, size_t index) {
    if (!model || index >= model->model.class_count()) return nullptr;
    return model->model.ensembles[index].class_name.c_str();
}

size_t fb_model_rule_count(const fb_model* model, size_t index) {
    if (!model || index >= model->model.class_count()) return 0;
    return model->model.ensembles[index].rules.size();
}

size_t fb_model_dim(const fb_model* model) { return model ? model->model.dim() : 0; }

fb_status fb_model_export_text(const fb_model* model, char** text) {
    return guarded([&] {
        require(model, "model");
        require(text, "text");
        *text = dup_string(fb::export_model_text(model->model));
    });
}

fb_status fb_model_add_class(const fb_model* base, const fb_model* donor, const char* class_name,
                             fb_model** out) {
    return guarded([&] {
        require(base, "base");
        require(donor, "donor");
        require(class_name, "class_name");
        require(out, "out");
        const auto* ensemble = donor->model.find(class_name);
        if (!ensemble)
            fb::fail(fb::ErrorCode::unknown_class,
                     std::string("donor model has no class '") + class_name + "'");
        *out = new fb_model{fb::add_class(base->model, *ensemble)};
    });
}

fb_status fb_model_add_trained_class(const fb_model* base, const fb_dataset* dataset,
                                     const char* class_name, const fb_train_config* config,
                                     fb_progress_fn progress, void* user, fb_model** out) {
    return guarded([&] {
        require(base, "base");
        require(dataset, "dataset");
        require(class_name, "class_name");
        require(out, "out");
        if (base->model.find(class_name))
            fb::fail(fb::ErrorCode::duplicate_class,
                     std::string("class '") + class_name + "' already exists in the model");
        auto ensemble =
            fb::train_class(dataset->dataset, class_name, to_core(config), to_sink(progress, user));
        *out = new fb_model{fb::add_class(base->model, std::move(ensemble))};
    });
}

fb_status fb_classify(const fb_model* model, const fb_image* image, double* scores,
                      size_t capacity, fb_classification* out) {
    return guarded([&] {
        require(model, "model");
        require(image, "image");
        require(out, "out");
        if (scores && capacity < model->model.class_count())
            fb::fail(fb::ErrorCode::invalid_argument, "score buffer smaller than class count");
        const auto result = fb::classify(model->model, image->image.descriptors);
        out->best = result.best;
        out->tie = result.tie ? 1 : 0;
        if (scores) std::copy(result.scores.begin(), result.scores.end(), scores);
    });
}

void fb_baseline_config_default(fb_baseline_config* config) {
    if (!config) return;
    const fb::BaselineConfig defaults;
    *config = fb_baseline_config{};
    config->k = defaults.k;
    config->seed = defaults.seed;
    config->ridge = defaults.ridge;
    config->gamma = defaults.gamma;
    config->threads = defaults.threads;
}

fb_status fb_baseline_train(const fb_dataset* dataset, const fb_baseline_config* config,
                            fb_baseline** out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        *out = new fb_baseline{fb::train_baseline(dataset->dataset, to_core(config))};
    });
}

fb_status fb_baseline_load(const char* path, fb_baseline** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new fb_baseline{fb::load_baseline(path)};
    });
}

fb_status fb_baseline_save(const fb_baseline* baseline, const char* path) {
    return guarded([&] {
        require(baseline, "baseline");
        require(path, "path");
        fb::save_baseline(baseline->model, path);
    });
}

void fb_baseline_free(fb_baseline* baseline) { delete baseline; }

size_t fb_baseline_class_count(const fb_baseline* baseline) {
    return baseline ? baseline->model.classes.size() : 0;
}

const char* fb_baseline_class_name(const fb_baseline* baseline, size_t index) {
    if (!baseline || index >= baseline->model.classes.size()) return nullptr;
    return baseline->model.classes[index].c_str();
}

fb_status fb_baseline_classify(const fb_baseline* baseline, const fb_image* image, double* values,
                               size_t capacity, size_t* best) {
    return guarded([&] {
        require(baseline, "baseline");
        require(image, "image");
        require(best, "best");
        if (values && capacity < baseline->model.classes.size())
            fb::fail(fb::ErrorCode::invalid_argument, "value buffer smaller than class count");
        const auto prediction = fb::classify_baseline(baseline->model, image->image);
        *best = prediction.best;
        if (values)
            std::copy(prediction.decision_values.begin(), prediction.decision_values.end(), values);
    });
}

fb_status fb_evaluate_model(const fb_model* model, const fb_dataset* dataset, unsigned threads,
                            fb_report** out) {
    return guarded([&] {
        require(model, "model");
        require(dataset, "dataset");
        require(out, "out");
        auto report = fb::evaluate_model(model->model, dataset->dataset, threads);
        report.io_seconds = dataset->io_seconds;
        *out = new fb_report{std::move(report)};
    });
}

fb_status fb_evaluate_baseline(const fb_baseline* baseline, const fb_dataset* dataset,
                               unsigned threads, fb_report** out) {
    return guarded([&] {
        require(baseline, "baseline");
        require(dataset, "dataset");
        require(out, "out");
        auto report = fb::evaluate_baseline(baseline->model, dataset->dataset, threads);
        report.io_seconds = dataset->io_seconds;
        *out = new fb_report{std::move(report)};
    });
}

fb_status fb_run_fuzzyboost(const fb_dataset* dataset, const fb_train_config* config,
                            fb_progress_fn progress, void* user, fb_report** out,
                            fb_model** model_out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        fb::MultiClassModel model;
        auto report =
            fb::run_fuzzyboost(dataset->dataset, to_core(config), to_sink(progress, user), &model);
        report.io_seconds = dataset->io_seconds;
        *out = new fb_report{std::move(report)};
        if (model_out) *model_out = new fb_model{std::move(model)};
    });
}

fb_status fb_run_baseline(const fb_dataset* dataset, const fb_baseline_config* config,
                          fb_report** out, fb_baseline** baseline_out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        fb::BaselineModel model;
        auto report = fb::run_baseline(dataset->dataset, to_core(config), &model);
        report.io_seconds = dataset->io_seconds;
        *out = new fb_report{std::move(report)};
        if (baseline_out) *baseline_out = new fb_baseline{std::move(model)};
    });
}

fb_status fb_benchmark(const fb_dataset* dataset, const fb_train_config* config, const size_t* ks,
                       size_t k_count, const fb_baseline_config* baseline_config,
                       size_t reference_k, fb_progress_fn progress, void* user, fb_report** out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(ks, "ks");
        require(out, "out");
        std::vector<std::size_t> sizes(ks, ks + k_count);
        auto report = fb::benchmark(dataset->dataset, to_core(config), sizes,
                                    to_core(baseline_config), reference_k, to_sink(progress, user));
        report.fuzzy.io_seconds = dataset->io_seconds;
        for (auto& b : report.baselines) b.io_seconds = dataset->io_seconds;
        *out = new fb_report{std::move(report)};
    });
}

fb_status fb_report_json(const fb_report* report, char** json) {
    return guarded([&] {
        require(report, "report");
        require(json, "json");
        std::visit(
            [&](const auto& r) {
                if constexpr (std::is_same_v<std::decay_t<decltype(r)>, fb::EvalReport>)
                    *json = dup_string(fb::report_to_json(r));
                else
                    *json = dup_string(fb::benchmark_to_json(r));
            },
            report->report);
    });
}

fb_status fb_report_text(const fb_report* report, char** text) {
    return guarded([&] {
        require(report, "report");
        require(text, "text");
        std::visit(
            [&](const auto& r) {
                if constexpr (std::is_same_v<std::decay_t<decltype(r)>, fb::EvalReport>)
                    *text = dup_string(fb::report_to_text(r));
                else
                    *text = dup_string(fb::benchmark_to_text(r));
            },
            report->report);
    });
}

double fb_report_total_accuracy(const fb_report* report) {
    if (!report) return 0.0;
    if (const auto* r = std::get_if<fb::EvalReport>(&report->report)) return r->total_accuracy_pct;
    return std::get<fb::BenchmarkReport>(report->report).fuzzy.total_accuracy_pct;
}

void fb_report_free(fb_report* report) { delete report; }

}  // extern "C"
