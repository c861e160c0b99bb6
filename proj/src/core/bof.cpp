#include "core/bof.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace fuzzyboost {

namespace {

constexpr std::size_t kAssignBlock = 1024;

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double d = a[n] - b[n];
        acc += d * d;
    }
    return acc;
}

std::size_t count_distinct_rows(const DescriptorMatrix& data) {
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        const auto ra = data.row(a), rb = data.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (less(order[i - 1], order[i])) ++distinct;
    return distinct;
}

struct Assignment {
    std::size_t word = 0;
    double dist2 = 0.0;
};

Assignment nearest(const std::vector<double>& centroids, std::size_t k, std::size_t dim,
                   std::span<const double> x) {
    Assignment best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(x, {centroids.data() + c * dim, dim});
        if (d < best.dist2) best = {c, d};
    }
    return best;
}

}  // namespace

KMeansResult kmeans(const DescriptorMatrix& data, const KMeansOptions& options) {
    const std::size_t n = data.rows();
    const std::size_t dim = data.dim();
    const std::size_t k = options.k;
    if (k < 2) fail(ErrorCode::invalid_argument, "dictionary size K must be >= 2");
    if (count_distinct_rows(data) < k)
        fail(ErrorCode::empty_input, "k-means: fewer than K=" + std::to_string(k) +
                                         " distinct descriptors");

    std::vector<double> points(data.values().begin(), data.values().end());
    auto point = [&](std::size_t i) { return std::span<const double>(points.data() + i * dim, dim); };

    // k-means++ seeding.
    Rng rng(options.seed, "kmeans");
    std::vector<double> centroids;
    centroids.reserve(k * dim);
    auto add_centroid = [&](std::size_t i) {
        const auto p = point(i);
        centroids.insert(centroids.end(), p.begin(), p.end());
    };
    add_centroid(rng.below(n));
    std::vector<double> d2(n);
    {
        const std::span<const double> first(centroids.data(), dim);
        parallel_for(n, options.threads, [&](std::size_t i) { d2[i] = squared_distance(point(i), first); });
    }
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        const double target = rng.uniform01() * total;
        double cumulative = 0.0;
        std::size_t chosen = n;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            cumulative += d2[i];
            last_positive = i;
            if (target < cumulative) {
                chosen = i;
                break;
            }
        }
        if (chosen == n) chosen = last_positive;
        add_centroid(chosen);
        const std::span<const double> fresh(centroids.data() + c * dim, dim);
        parallel_for(n, options.threads, [&](std::size_t i) {
            d2[i] = std::min(d2[i], squared_distance(point(i), fresh));
        });
    }

    KMeansResult result;
    std::vector<Assignment> assignment(n);
    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    const std::size_t blocks = (n + kAssignBlock - 1) / kAssignBlock;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        parallel_for(blocks, options.threads, [&](std::size_t b) {
            const std::size_t end = std::min(n, (b + 1) * kAssignBlock);
            for (std::size_t i = b * kAssignBlock; i < end; ++i)
                assignment[i] = nearest(centroids, k, dim, point(i));
        });
        double objective = 0.0;
        for (const auto& a : assignment) objective += a.dist2;
        result.objective.push_back(objective);
        result.iterations = iter + 1;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = assignment[i].word;
            ++counts[c];
            const auto p = point(i);
            for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += p[d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d)
                centroids[c * dim + d] = sums[c * dim + d] / double(counts[c]);
        }

        if (iter > 0) {
            const double prev = result.objective[iter - 1];
            if (prev <= 0.0 || (prev - objective) <= options.tolerance * prev) break;
        }
    }

    result.dictionary.dim = dim;
    result.dictionary.words = std::move(centroids);
    return result;
}

Dictionary build_dictionary(const DescriptorMatrix& data, std::size_t k, std::uint64_t seed,
                            unsigned threads) {
    KMeansOptions options;
    options.k = k;
    options.seed = seed;
    options.threads = threads;
    return kmeans(data, options).dictionary;
}

std::size_t nearest_word(const Dictionary& dictionary, DescriptorView x) {
    if (x.size() != dictionary.dim)
        fail(ErrorCode::dimension_mismatch, "descriptor dimensionality does not match dictionary");
    std::vector<double> v(x.begin(), x.end());
    return nearest(dictionary.words, dictionary.size(), dictionary.dim, v).word;
}

BofHistogram encode(const ImageDescriptors& image, const Dictionary& dictionary) {
    if (image.dim() != dictionary.dim)
        fail(ErrorCode::dimension_mismatch,
             "image '" + image.image_id + "' dimensionality does not match dictionary");
    if (image.count() == 0) fail(ErrorCode::empty_input, "image '" + image.image_id + "' is empty");
    BofHistogram histogram(dictionary.size(), 0.0);
    std::vector<double> v(image.dim());
    for (std::size_t r = 0; r < image.count(); ++r) {
        const auto row = image.descriptors.row(r);
        std::copy(row.begin(), row.end(), v.begin());
        histogram[nearest(dictionary.words, dictionary.size(), dictionary.dim, v).word] += 1.0;
    }
    const double total = static_cast<double>(image.count());
    for (double& h : histogram) h /= total;
    return histogram;
}

double chi_square_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::dimension_mismatch, "histogram length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = a[i] + b[i];
        if (denom == 0.0) continue;
        const double diff = a[i] - b[i];
        acc += diff * diff / denom;
    }
    return acc;
}

double chi_square_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * chi_square_distance(a, b));
}

BaselineModel train_baseline(const Dataset& dataset, const BaselineConfig& config) {
    validate_manifest(dataset.manifest(), true);
    const auto& manifest = dataset.manifest();
    const auto train = dataset.select(Split::train);
    for (const auto& name : manifest.classes)
        if (dataset.select(Split::train, name).empty())
            fail(ErrorCode::empty_input, "class '" + name + "' has no training images");

    DescriptorMatrix pooled(manifest.dimensionality);
    for (std::size_t i : train) {
        const auto& image = *dataset.image(i);
        for (std::size_t r = 0; r < image.count(); ++r) pooled.append(image.descriptors.row(r));
    }

    BaselineModel model;
    model.seed = config.seed;
    model.ridge = config.ridge;
    model.classes = manifest.classes;
    KMeansOptions km;
    km.k = config.k;
    km.seed = config.seed;
    km.max_iterations = config.max_iterations;
    km.threads = config.threads;
    model.dictionary = kmeans(pooled, km).dictionary;

    const std::size_t n = train.size();
    model.train_histograms.resize(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        model.train_histograms[i] = encode(*dataset.image(train[i]), model.dictionary);
    });

    Eigen::MatrixXd distances = Eigen::MatrixXd::Zero(n, n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j)
            distances(i, j) = chi_square_distance(model.train_histograms[i], model.train_histograms[j]);
    });
    if (config.gamma > 0.0) {
        model.gamma = config.gamma;
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += distances(i, j);
        const double pairs = double(n) * double(n - 1) / 2.0;
        if (!(pairs > 0.0) || !(sum > 0.0))
            fail(ErrorCode::numeric, "degenerate kernel matrix: all training histograms identical");
        model.gamma = pairs / sum;
    }

    Eigen::MatrixXd gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        gram(i, i) = 1.0 + config.ridge;
        for (std::size_t j = i + 1; j < n; ++j)
            gram(i, j) = gram(j, i) = std::exp(-model.gamma * distances(i, j));
    }
    Eigen::MatrixXd targets = Eigen::MatrixXd::Constant(n, manifest.classes.size(), -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& label = manifest.images[train[i]].class_label;
        const auto c = static_cast<std::size_t>(
            std::find(manifest.classes.begin(), manifest.classes.end(), label) -
            manifest.classes.begin());
        targets(i, c) = 1.0;
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        fail(ErrorCode::numeric, "degenerate kernel matrix: regularized solve failed");
    const Eigen::MatrixXd coeffs = llt.solve(targets);
    if (!coeffs.allFinite()) fail(ErrorCode::numeric, "degenerate kernel matrix: non-finite solution");

    model.coefficients.assign(manifest.classes.size(), std::vector<double>(n));
    for (std::size_t c = 0; c < manifest.classes.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) model.coefficients[c][i] = coeffs(i, c);
    return model;
}

BaselinePrediction classify_baseline(const BaselineModel& model, const ImageDescriptors& image) {
    const BofHistogram h = encode(image, model.dictionary);
    const std::size_t n = model.train_histograms.size();
    std::vector<double> kernel(n);
    for (std::size_t i = 0; i < n; ++i)
        kernel[i] = chi_square_kernel(h, model.train_histograms[i], model.gamma);

    BaselinePrediction prediction;
    prediction.decision_values.resize(model.classes.size());
    for (std::size_t c = 0; c < model.classes.size(); ++c)
        prediction.decision_values[c] =
            std::inner_product(kernel.begin(), kernel.end(), model.coefficients[c].begin(), 0.0);
    for (std::size_t c = 1; c < model.classes.size(); ++c)
        if (prediction.decision_values[c] > prediction.decision_values[prediction.best])
            prediction.best = c;
    prediction.class_name = model.classes[prediction.best];
    return prediction;
}

std::vector<std::uint8_t> serialize_baseline(const BaselineModel& model) {
    ByteWriter out;
    out.raw(kBaselineMagic, 4);
    out.u8(kBaselineVersion);
    out.u64(model.seed);
    out.u32(static_cast<std::uint32_t>(model.dictionary.size()));
    out.u32(static_cast<std::uint32_t>(model.dictionary.dim));
    for (double w : model.dictionary.words) out.f64(w);
    out.f64(model.gamma);
    out.f64(model.ridge);
    out.u32(static_cast<std::uint32_t>(model.classes.size()));
    for (const auto& name : model.classes) out.str(name);
    out.u32(static_cast<std::uint32_t>(model.train_histograms.size()));
    for (const auto& h : model.train_histograms)
        for (double v : h) out.f64(v);
    for (const auto& coeffs : model.coefficients)
        for (double v : coeffs) out.f64(v);
    out.u32(crc32_of(out.bytes()));
    return out.take();
}

BaselineModel deserialize_baseline(std::span<const std::uint8_t> bytes, const std::string& source) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kBaselineMagic, 4) != 0)
        fail(ErrorCode::malformed_header, source + ": not a baseline model file");
    if (bytes.size() < 9) fail(ErrorCode::corrupt, source + ": truncated baseline file");
    if (bytes[4] != kBaselineVersion)
        fail(ErrorCode::version_mismatch,
             source + ": baseline format version " + std::to_string(bytes[4]));
    const auto body = bytes.first(bytes.size() - 4);
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + body.size(), 4);
    if (crc32_of(body) != stored) fail(ErrorCode::corrupt, source + ": checksum mismatch");

    ByteReader in(body, source);
    in.take(5);
    BaselineModel model;
    model.seed = in.u64();
    const std::uint32_t k = in.u32();
    model.dictionary.dim = in.u32();
    if (std::uint64_t{k} * model.dictionary.dim * 8 > in.remaining())
        fail(ErrorCode::corrupt, source + ": dictionary exceeds file size");
    model.dictionary.words.resize(std::size_t{k} * model.dictionary.dim);
    for (double& w : model.dictionary.words) w = in.f64();
    model.gamma = in.f64();
    model.ridge = in.f64();
    const std::uint32_t classes = in.u32();
    for (std::uint32_t c = 0; c < classes; ++c) model.classes.push_back(in.str());
    const std::uint32_t n = in.u32();
    if (std::uint64_t{n} * (k + classes) * 8 != in.remaining())
        fail(ErrorCode::corrupt, source + ": payload size does not match header");
    model.train_histograms.assign(n, BofHistogram(k));
    for (auto& h : model.train_histograms)
        for (double& v : h) v = in.f64();
    model.coefficients.assign(classes, std::vector<double>(n));
    for (auto& coeffs : model.coefficients)
        for (double& v : coeffs) v = in.f64();
    return model;
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
    write_file_bytes(path, serialize_baseline(model));
}

BaselineModel load_baseline(const std::filesystem::path& path) {
    return deserialize_baseline(read_file_bytes(path), path.string());
}

}  // namespace fuzzyboost
