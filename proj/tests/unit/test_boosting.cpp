#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/boosting.hpp"
#include "core/model_io.hpp"
#include "core/synthetic.hpp"
#include "test_util.hpp"

using namespace fuzzyboost;
using doctest::Approx;
using testutil::error_of;
using testutil::make_image;

namespace {

// Images with `per_image` descriptors drawn around `mean` in every dimension.
std::vector<ImageHandle> cluster(std::mt19937_64& gen, const std::string& prefix, std::size_t images,
                                 std::size_t per_image, std::size_t dim, double mean,
                                 double spread) {
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<ImageHandle> out;
    for (std::size_t i = 0; i < images; ++i) {
        std::vector<float> v(per_image * dim);
        for (auto& x : v) x = static_cast<float>(mean + noise(gen));
        char id[32];
        std::snprintf(id, sizeof id, "%s%03zu", prefix.c_str(), i);
        out.push_back(make_image(id, DescriptorMatrix(dim, std::move(v))));
    }
    return out;
}

LearningSet overlapping_set(std::uint64_t seed, std::size_t dim = 3) {
    std::mt19937_64 gen(seed);
    LearningSet set;
    set.target_class = "pos";
    set.positives = cluster(gen, "p", 8, 6, dim, 0.0, 1.0);
    set.negatives = cluster(gen, "n", 8, 6, dim, 0.8, 1.0);
    return set;
}

double misclassified_mass(const std::vector<double>& w, const std::vector<std::uint8_t>& correct) {
    double m = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l)
        if (!correct[l]) m += w[l];
    return m;
}

// Independent decision: product/min of exp(-z^2) compared to 1/2.
bool oracle_fires(const FuzzyRule& rule, DescriptorView x, TNorm t) {
    double a = 1.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double z = (x[n] - rule.memberships[n].center) / rule.memberships[n].width;
        a = t == TNorm::minimum ? std::min(a, std::exp(-z * z)) : a * std::exp(-z * z);
    }
    return a >= 0.5;
}

}  // namespace

TEST_CASE("initial weights are uniform") {
    CHECK(init_weights(4) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(init_weights(1) == std::vector<double>{1.0});
    for (std::size_t L : {3u, 7u, 1000u, 12345u}) {
        const auto w = init_weights(L);
        CHECK(std::accumulate(w.begin(), w.end(), 0.0) == Approx(1.0).epsilon(1e-12));
    }
    CHECK(error_of([] { init_weights(0); }) == ErrorCode::empty_input);
}

TEST_CASE("degenerate sampling distribution always returns its single index") {
    Rng rng(1);
    const std::vector<double> w{1.0, 0.0, 0.0, 0.5, 0.5};
    for (int i = 0; i < 1000; ++i) CHECK(sample_positive(w, 3, rng) == 0);
    const std::vector<double> middle{0.0, 0.2, 0.0, 0.8};
    for (int i = 0; i < 1000; ++i) CHECK(sample_positive(middle, 3, rng) == 1);
}

TEST_CASE("uniform sampling passes a chi-square goodness-of-fit test") {
    const std::size_t k = 10, draws = 100000;
    const std::vector<double> w(k + 5, 1.0 / (k + 5));
    Rng rng(2024, "test");
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < draws; ++i) counts[sample_positive(w, k, rng)] += 1;
    const double expected = double(draws) / k;
    const double sd = std::sqrt(draws * (1.0 / k) * (1 - 1.0 / k));
    double chi2 = 0.0;
    for (double c : counts) {
        CHECK(std::abs(c - expected) <= 3 * sd);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 99.9th percentile of chi-square with 9 degrees of freedom.
    CHECK(chi2 < 27.877);
}

TEST_CASE("weighted sampling follows the weights") {
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4, 7.0};
    Rng rng(77);
    std::vector<double> counts(4, 0.0);
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) counts[sample_positive(w, 4, rng)] += 1;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double e = draws * w[i];  // positive weights already sum to 1
        chi2 += (counts[i] - e) * (counts[i] - e) / e;
    }
    // 99.9th percentile, 3 degrees of freedom.
    CHECK(chi2 < 16.266);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
    const std::vector<double> w{0.3, 0.1, 0.6};
    Rng a(9, "boost/x"), b(9, "boost/x"), c(9, "boost/y");
    std::vector<std::size_t> sa, sb, sc;
    for (int i = 0; i < 200; ++i) {
        sa.push_back(sample_positive(w, 3, a));
        sb.push_back(sample_positive(w, 3, b));
        sc.push_back(sample_positive(w, 3, c));
    }
    CHECK(sa == sb);
    CHECK(sa != sc);
}

TEST_CASE("matching returns the seed itself for its own image") {
    std::mt19937_64 gen(3);
    auto images = cluster(gen, "i", 4, 5, 2, 0.0, 1.0);
    const auto seed = images[2]->descriptors.row(3);
    const auto m = match_per_image(seed, images, DistanceMetric::euclidean);
    REQUIRE(m.rows() == 4);
    CHECK(std::equal(m.row(2).begin(), m.row(2).end(), seed.begin()));
}

TEST_CASE("matching equals a brute-force nearest-descriptor scan") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + gen() % 4;
        auto images = cluster(gen, "i", 3, 1 + gen() % 5, dim, 0.0, 2.0);
        const auto seed_m = testutil::random_matrix(gen, 1, dim, -2, 2);
        for (auto metric : {DistanceMetric::euclidean, DistanceMetric::manhattan}) {
            const auto m = match_per_image(seed_m.row(0), images, metric);
            for (std::size_t i = 0; i < images.size(); ++i) {
                const auto& d = images[i]->descriptors;
                std::size_t best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < d.rows(); ++k) {
                    double acc = 0.0;
                    for (std::size_t n = 0; n < dim; ++n) {
                        const double diff = double(d.row(k)[n]) - double(seed_m.row(0)[n]);
                        acc += metric == DistanceMetric::euclidean ? diff * diff : std::abs(diff);
                    }
                    if (acc < best_d) {
                        best_d = acc;
                        best = k;
                    }
                }
                CHECK(std::equal(m.row(i).begin(), m.row(i).end(), d.row(best).begin()));
            }
        }
    }
}

TEST_CASE("distance ties keep the lowest descriptor index") {
    // Both descriptors sit at distance 1 from the origin seed; the first must win.
    auto img = make_image("a", DescriptorMatrix(2, {1, 0, 0, 1, 0, -1}));
    const float seed[2] = {0, 0};
    const std::vector<ImageHandle> images{img};
    const auto m = match_per_image(seed, images, DistanceMetric::euclidean);
    CHECK(m.row(0)[0] == 1.0f);
    CHECK(m.row(0)[1] == 0.0f);
}

TEST_CASE("weighted error counting cases") {
    LabeledDescriptors data;
    data.rows = DescriptorMatrix(1, {0, 0, 0, 0, 9, 9, 9, 9});
    data.labels = {1, 1, 1, 1, 0, 0, 0, 0};
    data.positive_count = 4;
    FuzzyRule rule;
    rule.memberships = {{0.0, 1.0}};
    const auto w = init_weights(8);
    CHECK(evaluate_error(rule, data, w, TNorm::minimum) == 0.0);

    // Two positives moved off the rule: uniform weights over 8 give 2/8.
    data.rows = DescriptorMatrix(1, {0, 0, 5, 5, 9, 9, 9, 9});
    CHECK(evaluate_error(rule, data, w, TNorm::minimum) == 0.25);
}

TEST_CASE("weighted error matches direct summation") {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 1 + gen() % 4, L = 2 + gen() % 30;
        LabeledDescriptors data;
        data.rows = testutil::random_matrix(gen, L, dim, -2, 2);
        data.positive_count = 1 + gen() % (L - 1);
        data.labels.assign(L, 0);
        std::fill_n(data.labels.begin(), data.positive_count, 1);
        std::vector<double> w(L);
        std::uniform_real_distribution<double> u(0.01, 1);
        double total = 0.0;
        for (auto& x : w) total += (x = u(gen));
        for (auto& x : w) x /= total;
        const auto rule = fit_rule(testutil::random_matrix(gen, 3, dim, -1, 1));
        for (TNorm t : {TNorm::minimum, TNorm::product}) {
            double eps = 0.0;
            for (std::size_t l = 0; l < L; ++l)
                if (oracle_fires(rule, data.rows.row(l), t) != bool(data.labels[l])) eps += w[l];
            CHECK(evaluate_error(rule, data, w, t) == Approx(eps).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform correctness flags leave weights unchanged") {
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    for (std::uint8_t flag : {0, 1}) {
        const std::vector<std::uint8_t> c(4, flag);
        const auto next = update_weights(w, c, 0.7);
        for (std::size_t i = 0; i < 4; ++i) CHECK(next[i] == Approx(w[i]).epsilon(1e-14));
    }
}

TEST_CASE("one correct and one wrong with alpha ln 2 gives (1/3, 2/3)") {
    const auto next = update_weights(std::vector<double>{0.5, 0.5},
                                     std::vector<std::uint8_t>{1, 0}, std::log(2.0));
    CHECK(next[0] == Approx(1.0 / 3).epsilon(1e-15));
    CHECK(next[1] == Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("updated weights sum to one") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 1 + gen() % 100;
        std::vector<double> w(L);
        std::vector<std::uint8_t> c(L);
        for (std::size_t l = 0; l < L; ++l) {
            w[l] = u(gen);
            c[l] = gen() % 2;
        }
        const auto next = update_weights(w, c, 3 * u(gen));
        CHECK(std::accumulate(next.begin(), next.end(), 0.0) == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("balanced and correct-only exponents give their expected misclassified mass") {
    for (double eps : {0.05, 0.2, 0.3, 0.45}) {
        // Four samples: one wrong carrying eps, three right sharing 1 - eps.
        const std::vector<double> w{eps, (1 - eps) / 3, (1 - eps) / 3, (1 - eps) / 3};
        const std::vector<std::uint8_t> c{0, 1, 1, 1};
        const double alpha = compute_alpha(eps);
        CHECK(update_weights(w, c, 2 * alpha)[0] == Approx(0.5).epsilon(1e-12));
        CHECK(update_weights(w, c, alpha)[0] ==
              Approx(eps / (eps + std::sqrt(eps * (1 - eps)))).epsilon(1e-12));
    }
}

TEST_CASE("alpha values") {
    CHECK(compute_alpha(0.25) == Approx(0.5 * std::log(3.0)).epsilon(1e-15));
    CHECK(compute_alpha(0.25) == Approx(0.5493).epsilon(1e-4));
    CHECK(compute_alpha(0.1) == Approx(0.5 * std::log(9.0)).epsilon(1e-15));
    CHECK(compute_alpha(0.1) == Approx(1.0986).epsilon(1e-4));
    const double near_half = compute_alpha(0.5 - 1e-9);
    CHECK(near_half > 0.0);
    CHECK(near_half < 1e-8);
    CHECK(error_of([] { compute_alpha(0.5); }) == ErrorCode::numeric);
    CHECK(error_of([] { compute_alpha(0.0); }) == ErrorCode::numeric);
    CHECK(alpha_cap(10) == Approx(compute_alpha(1.0 / 20)));
}

TEST_CASE("well separated clusters need a single perfect rule") {
    std::mt19937_64 gen(10);
    LearningSet set;
    set.target_class = "pos";
    set.positives = cluster(gen, "p", 10, 1, 2, 0.0, 0.5);
    set.negatives = cluster(gen, "n", 10, 1, 2, 20.0, 0.5);
    TrainConfig cfg;
    cfg.t_max = 10;
    ClassTrainer trainer(set, cfg);
    const auto first = trainer.step();
    REQUIRE(first);
    CHECK(first->epsilon == 0.0);
    CHECK(first->outcome == RoundOutcome::perfect);
    CHECK_FALSE(trainer.step());
    const auto e = trainer.finish();
    REQUIRE(e.rules.size() == 1);
    CHECK(e.rules[0].importance == 1.0);
    CHECK(e.rules[0].raw_alpha == Approx(alpha_cap(20)));
}

TEST_CASE("overlapping clusters stop within t_max with normalized importances") {
    TrainConfig cfg;
    cfg.t_max = 5;
    const auto e = train_class(overlapping_set(11), cfg);
    CHECK(e.rules.size() >= 1);
    CHECK(e.rules.size() <= 5);
    double sum = 0.0;
    for (const auto& r : e.rules) sum += r.importance;
    CHECK(sum == Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(e.validate());
}

TEST_CASE("every accepted round leaves half the mass on its mistakes") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TrainConfig cfg;
        cfg.t_max = 30;
        cfg.seed = seed;
        ClassTrainer trainer(overlapping_set(100 + seed), cfg);
        while (auto rec = trainer.step()) {
            const auto& w = trainer.state().weights;
            CHECK(std::accumulate(w.begin(), w.end(), 0.0) == Approx(1.0).epsilon(1e-12));
            if (rec->outcome != RoundOutcome::accepted) continue;
            CHECK(rec->epsilon > 0.0);
            CHECK(rec->epsilon < 0.5);
            CHECK(std::abs(misclassified_mass(w, rec->correct) - 0.5) <= 1e-9);
        }
    }
}

TEST_CASE("rounds follow the sample-match-fit-evaluate recipe") {
    TrainConfig cfg;
    cfg.t_max = 8;
    cfg.seed = 5;
    const auto set = overlapping_set(12);
    ClassTrainer trainer(set, cfg);
    std::vector<double> weights = trainer.state().weights;
    while (auto rec = trainer.step()) {
        CHECK(rec->seed_row < trainer.data().positive_count);
        const auto matched = match_per_image(trainer.data().rows.row(rec->seed_row),
                                             set.positives, cfg.metric);
        CHECK(fit_rule(matched, cfg.sigma_floor).memberships == rec->rule.memberships);
        CHECK(evaluate_error(rec->rule, trainer.data(), weights, cfg.tnorm) == rec->epsilon);
        weights = trainer.state().weights;
    }
}

TEST_CASE("training is deterministic and independent of thread count") {
    const auto set = overlapping_set(13, 4);
    TrainConfig cfg;
    cfg.t_max = 12;
    cfg.seed = 21;
    const auto a = train_class(set, cfg, {}, 1);
    const auto b = train_class(set, cfg, {}, 1);
    const auto c = train_class(set, cfg, {}, 4);
    CHECK(a == b);
    CHECK(a == c);
    cfg.seed = 22;
    CHECK_FALSE(train_class(set, cfg) == a);
}

TEST_CASE("multi-class training matches per-class training and is thread independent") {
    SyntheticSpec spec;
    spec.train_per_class = 8;
    spec.test_per_class = 2;
    spec.descriptors_per_image = 6;
    spec.dim = 6;
    spec.separation = 2.0;
    spec.seed = 4;
    const Dataset ds = generate_synthetic(spec);
    TrainConfig cfg;
    cfg.t_max = 6;
    cfg.seed = 3;
    cfg.threads = 1;
    const auto one = train_model(ds, {}, cfg);
    cfg.threads = 4;
    const auto four = train_model(ds, {}, cfg);
    CHECK(serialize_model(one) == serialize_model(four));
    REQUIRE(one.class_count() == 3);
    CHECK(one.metadata.config_digest == cfg.digest());
    CHECK(one.ensembles[1] == train_class(ds, "Cat", cfg));

    // A class's ensemble does not depend on which other classes are trained with it.
    const std::vector<std::string> just_train{"Train"};
    CHECK(train_model(ds, just_train, cfg).ensembles[0] == one.ensembles[2]);

    const std::vector<std::string> unknown{"Dog"};
    CHECK(error_of([&] { train_model(ds, unknown, cfg); }) == ErrorCode::unknown_class);
}

TEST_CASE("progress events are reported per round") {
    TrainConfig cfg;
    cfg.t_max = 4;
    std::vector<RoundEvent> events;
    const auto e = train_class(overlapping_set(14), cfg, [&](const RoundEvent& ev) {
        events.push_back(ev);
    });
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().rules == e.rules.size());
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].round == i + 1);
}

TEST_CASE("configuration validation and digest") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.t_max = 0;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::invalid_argument);
    bad = cfg;
    bad.tconorm = TConorm::probabilistic_sum;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::invalid_argument);
    bad.tnorm = TNorm::product;
    CHECK_NOTHROW(bad.validate());

    auto threads = cfg;
    threads.threads = 7;
    CHECK(threads.digest() == cfg.digest());
    auto seeded = cfg;
    seeded.seed = 1;
    CHECK(seeded.digest() != cfg.digest());
    CHECK(cfg.digest().size() == 16);
}

TEST_CASE("learning set without negatives cannot be trained") {
    auto set = overlapping_set(15);
    set.negatives.clear();
    CHECK(error_of([&] { ClassTrainer(set, TrainConfig{}); }) == ErrorCode::empty_input);
}
