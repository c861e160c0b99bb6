// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path to fuzzyboost CLI>

#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/boosting.hpp"
#include "core/bof.hpp"
#include "core/ensemble.hpp"
#include "core/evaluation.hpp"
#include "core/fuzzy_rule.hpp"
#include "core/model_io.hpp"
#include "core/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fuzzyboost;

namespace {

// Pinned tolerances.
constexpr double kMembershipTol = 1e-12;
constexpr double kBoostTol = 1e-9;
constexpr double kEnsembleTol = 1e-12;
constexpr double kFuzzyAccuracyPct = 95.0;
constexpr double kFixtureSeconds = 10.0;
constexpr double kBaselineAccuracyPct = 90.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name;
    if (!o.detail.empty()) std::cout << "  (" << o.detail << ")";
    std::cout << std::endl;
    if (!o.pass) ++failures;
}

template <class Fn>
void run(const char* name, Fn fn) {
    try {
        report(name, fn());
    } catch (const std::exception& e) {
        report(name, {false, std::string("exception: ") + e.what()});
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

int shell(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

SyntheticSpec separable_fixture() {
    SyntheticSpec spec;
    spec.train_per_class = 30;
    spec.test_per_class = 10;
    spec.descriptors_per_image = 20;
    spec.dim = 16;
    spec.spread = 1.0;
    spec.separation = 6.0;
    spec.seed = 2024;
    return spec;
}

// ---------------------------------------------------------------------------

Outcome rule_construction() {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> value(-50.0, 50.0);
    const double divisor = 2.0 * std::sqrt(-std::log(0.5));
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 2 + gen() % 9;  // 2..10
        const std::size_t dim = 1 + gen() % 8;   // 1..8
        std::vector<float> v(rows * dim);
        for (auto& x : v) x = static_cast<float>(value(gen));
        const DescriptorMatrix matched(dim, v);
        const auto rule = fit_rule(matched);
        for (std::size_t n = 0; n < dim; ++n) {
            double lo = v[n], hi = v[n];
            for (std::size_t r = 1; r < rows; ++r) {
                lo = std::min(lo, static_cast<double>(v[r * dim + n]));
                hi = std::max(hi, static_cast<double>(v[r * dim + n]));
            }
            const double d = std::abs(lo - hi);
            const double m = hi - d / 2.0;
            const double sigma = d / divisor;
            const auto& mf = rule.memberships[n];
            if (mf.center != m || mf.width != sigma)
                return {false, "trial " + std::to_string(trial) + " column " + std::to_string(n) +
                                   " center/width differ from the oracle"};
            const double at_lo = std::exp(-std::pow((lo - m) / sigma, 2));
            const double at_hi = std::exp(-std::pow((hi - m) / sigma, 2));
            worst = std::max({worst, std::abs(mf(lo) - 0.5), std::abs(mf(hi) - 0.5),
                              std::abs(at_lo - 0.5), std::abs(at_hi - 0.5)});
        }
    }
    return {worst <= kMembershipTol, "100 matrices, max |mu(extreme) - 0.5| = " + fmt(worst)};
}

Outcome boosting_identities() {
    double worst_mass = 0.0, worst_sum = 0.0, worst_beta = 0.0;
    std::size_t accepted = 0;
    for (std::uint64_t run = 0; run < 50; ++run) {
        SyntheticSpec spec;
        spec.train_per_class = 8;
        spec.test_per_class = 1;
        spec.descriptors_per_image = 6;
        spec.dim = 4;
        spec.separation = 1.0;  // overlapping clusters
        spec.seed = 500 + run;
        const auto ds = generate_synthetic(spec);
        TrainConfig cfg;
        cfg.t_max = 25;
        cfg.seed = run;
        cfg.threads = 1;
        const auto set = assemble_learning_set(ds, ds.manifest().classes[run % 3], cfg.negatives,
                                               cfg.seed);
        ClassTrainer trainer(set, cfg, 1);
        while (auto rec = trainer.step()) {
            if (rec->outcome != RoundOutcome::accepted) continue;
            ++accepted;
            const auto& w = trainer.state().weights;
            double total = 0.0, wrong = 0.0;
            for (std::size_t l = 0; l < w.size(); ++l) {
                total += w[l];
                if (!rec->correct[l]) wrong += w[l];
            }
            worst_mass = std::max(worst_mass, std::abs(wrong - 0.5));
            worst_sum = std::max(worst_sum, std::abs(total - 1.0));
        }
        if (!trainer.state().rules.empty()) {
            const auto e = trainer.finish();
            double beta = 0.0;
            for (const auto& r : e.rules) beta += r.importance;
            worst_beta = std::max(worst_beta, std::abs(beta - 1.0));
        }
    }
    const bool ok = accepted > 0 && worst_mass <= kBoostTol && worst_sum <= kBoostTol &&
                    worst_beta <= kBoostTol;
    return {ok, "50 runs, " + std::to_string(accepted) + " accepted rounds; max |mass-0.5| = " +
                    fmt(worst_mass) + ", |sum D-1| = " + fmt(worst_sum) +
                    ", |sum beta-1| = " + fmt(worst_beta)};
}

Outcome separable_accuracy() {
    const auto ds = generate_synthetic(separable_fixture());
    TrainConfig cfg;
    cfg.t_max = 20;
    cfg.seed = 1;
    cfg.threads = 1;
    const auto start = std::chrono::steady_clock::now();
    const auto model = train_model(ds, {}, cfg);
    const auto report = evaluate_model(model, ds, 1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {report.total_accuracy_pct >= kFuzzyAccuracyPct && secs < kFixtureSeconds,
            "accuracy " + fmt(report.total_accuracy_pct) + "%, " + fmt(secs) +
                " s single-threaded"};
}

double oracle_score(const ClassEnsemble& e, const DescriptorMatrix& q) {
    double h = 0.0;
    for (const auto& rule : e.rules) {
        double f = 0.0;
        double complement = 1.0;
        for (std::size_t i = 0; i < q.rows(); ++i) {
            double a = 1.0;
            for (std::size_t n = 0; n < e.dim; ++n) {
                const double z = (q.row(i)[n] - rule.memberships[n].center) / rule.memberships[n].width;
                const double mu = std::exp(-z * z);
                a = e.tnorm == TNorm::minimum ? std::min(a, mu) : a * mu;
            }
            if (e.tconorm == TConorm::maximum)
                f = std::max(f, a);
            else
                complement *= 1.0 - a;
        }
        if (e.tconorm == TConorm::probabilistic_sum) f = 1.0 - complement;
        h += rule.importance * f;
    }
    return h;
}

Outcome ensemble_oracle() {
    std::mt19937_64 gen(303);
    std::uniform_real_distribution<double> c(-2, 2), w(0.3, 3), a(0.1, 2);
    double worst = 0.0;
    std::size_t checks = 0;
    for (const auto& [tnorm, tconorm] : {std::pair{TNorm::minimum, TConorm::maximum},
                                         std::pair{TNorm::product, TConorm::probabilistic_sum}}) {
        for (int trial = 0; trial < 500; ++trial) {
            const std::size_t dim = 1 + gen() % 4;
            MultiClassModel model;
            for (int k = 0; k < 3; ++k) {
                ClassEnsemble e;
                e.class_name = std::string(1, static_cast<char>('A' + k));
                e.dim = dim;
                e.tnorm = tnorm;
                e.tconorm = tconorm;
                const std::size_t rules = 1 + gen() % 3;
                double total = 0.0;
                for (std::size_t r = 0; r < rules; ++r) {
                    FuzzyRule rule;
                    for (std::size_t n = 0; n < dim; ++n) rule.memberships.push_back({c(gen), w(gen)});
                    rule.raw_alpha = a(gen);
                    total += rule.raw_alpha;
                    e.rules.push_back(rule);
                }
                for (auto& rule : e.rules) rule.importance = rule.raw_alpha / total;
                model.ensembles.push_back(e);
            }
            const std::size_t u = 1 + gen() % 4;
            std::vector<float> qv(u * dim);
            for (auto& x : qv) x = static_cast<float>(c(gen));
            const DescriptorMatrix q(dim, qv);
            const auto result = classify(model, q);
            for (std::size_t k = 0; k < 3; ++k) {
                worst = std::max(worst, std::abs(result.scores[k] - oracle_score(model.ensembles[k], q)));
                ++checks;
            }
        }
    }
    return {worst <= kEnsembleTol,
            std::to_string(checks) + " scores over (min,max) and (product,probsum), max error " +
                fmt(worst)};
}

Outcome class_isolation() {
    auto spec = separable_fixture();
    spec.train_per_class = 10;
    spec.test_per_class = 1;
    const auto ds = generate_synthetic(spec);
    TrainConfig cfg;
    cfg.t_max = 10;
    cfg.threads = 1;
    const std::vector<std::string> first{"Bus", "Cat"};
    const auto base = train_model(ds, first, cfg);
    const auto grown = add_class(base, train_class(ds, "Train", cfg));
    for (std::size_t k = 0; k < base.class_count(); ++k)
        if (serialize_ensemble(base.ensembles[k]) != serialize_ensemble(grown.ensembles[k]))
            return {false, "ensemble " + base.ensembles[k].class_name + " changed"};

    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> v(-2.0, 8.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<float> qv((1 + gen() % 20) * spec.dim);
        for (auto& x : qv) x = static_cast<float>(v(gen));
        const DescriptorMatrix q(spec.dim, qv);
        const auto before = classify(base, q);
        const auto after = classify(grown, q);
        for (std::size_t k = 0; k < base.class_count(); ++k)
            if (before.scores[k] != after.scores[k])
                return {false, "H changed on query " + std::to_string(i)};
    }
    return {true, "2 prior ensembles byte-identical, 1000 queries with identical H"};
}

Outcome cli_determinism(const std::string& cli, const fs::path& dir) {
    const auto manifest = write_synthetic(separable_fixture(), dir / "det");
    const std::string base = "'" + cli + "' train -q --manifest '" + manifest.string() + "' --seed 7 --t-max 20";
    if (shell(base + " --out '" + (dir / "a.fbm").string() + "' >/dev/null 2>&1") != 0 ||
        shell(base + " --out '" + (dir / "b.fbm").string() + "' >/dev/null 2>&1") != 0)
        return {false, "train did not exit 0"};
    const auto a = slurp(dir / "a.fbm");
    const auto b = slurp(dir / "b.fbm");
    return {!a.empty() && a == b, std::to_string(a.size()) + "-byte model files " +
                                      (a == b ? "identical" : "differ")};
}

Outcome baseline_parity(const std::string& cli, const fs::path& dir) {
    const auto manifest = write_synthetic(separable_fixture(), dir / "parity");
    const auto text = dir / "bench.txt";
    const auto json = dir / "bench.json";
    const int rc = shell("'" + cli + "' benchmark -q --threads 0 --manifest '" + manifest.string() +
                         "' --t-max 20 --ks 200,250,300,350,400 --reference-k 350 --json '" +
                         json.string() + "' >'" + text.string() + "' 2>/dev/null");
    if (rc != 0) return {false, "benchmark exited " + std::to_string(rc)};
    const auto out = slurp(text);
    for (const char* needle :
         {"Dictionary size: 200", "Dictionary size: 250", "Dictionary size: 300",
          "Dictionary size: 350", "Dictionary size: 400", "CQ", "LT", "TT", "Positive", "Negative",
          "Accuracy", "350*"})
        if (out.find(needle) == std::string::npos)
            return {false, std::string("benchmark text lacks '") + needle + "'"};
    const auto j = nlohmann::json::parse(slurp(json));
    double acc200 = -1.0;
    for (const auto& b : j["baselines"])
        if (b["dictionary_size"] == 200) acc200 = b["total"]["accuracy_pct"].get<double>();
    return {acc200 >= kBaselineAccuracyPct,
            "BoF K=200 accuracy " + fmt(acc200) + "%, sweep {200,250,300,350,400} in both tables"};
}

Outcome speed_property(const std::string& cli, const fs::path& dir) {
    auto spec = separable_fixture();
    spec.train_per_class = 100;
    const auto manifest = write_synthetic(spec, dir / "speed");
    const auto json = dir / "speed.json";
    const auto text = dir / "speed.txt";
    const int rc = shell("'" + cli + "' benchmark -q --manifest '" + manifest.string() +
                         "' --t-max 20 --ks 350 --reference-k 350 --json '" + json.string() +
                         "' >'" + text.string() + "' 2>/dev/null");
    if (rc != 0) return {false, "benchmark exited " + std::to_string(rc)};
    if (slurp(text).find("total") == std::string::npos)
        return {false, "report does not show the ratio"};
    const auto j = nlohmann::json::parse(slurp(json));
    const auto& r = j["ratios"][0];
    const double fuzzy = r["fuzzy_total_seconds"].get<double>();
    const double bof = r["baseline_total_seconds"].get<double>();
    return {fuzzy <= bof, "300 train images, K=350: fuzzyboost LT+TT " + fmt(fuzzy) + " s, BoF " +
                              fmt(bof) + " s, ratio " + fmt(r["total_ratio"].get<double>()) + "x"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <fuzzyboost CLI>\n";
        return 2;
    }
    const std::string cli = fs::absolute(argv[1]).string();
    const fs::path dir = fs::temp_directory_path() / ("fb_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    run("rule-construction oracle", rule_construction);
    run("boosting identities", boosting_identities);
    run("separable-fixture accuracy", separable_accuracy);
    run("ensemble oracle", ensemble_oracle);
    run("class isolation", class_isolation);
    run("determinism", [&] { return cli_determinism(cli, dir); });
    run("baseline parity harness", [&] { return baseline_parity(cli, dir); });
    run("speed property", [&] { return speed_property(cli, dir); });

    std::error_code ec;
    fs::remove_all(dir, ec);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
