#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/descriptors.hpp"

namespace fuzzyboost {

// Visual dictionary: K centroids, row-major K x N.
struct Dictionary {
    std::size_t dim = 0;
    std::vector<double> words;

    std::size_t size() const { return dim == 0 ? 0 : words.size() / dim; }
    std::span<const double> word(std::size_t k) const { return {words.data() + k * dim, dim}; }

    friend bool operator==(const Dictionary&, const Dictionary&) = default;
};

struct KMeansOptions {
    std::size_t k = 350;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 100;
    double tolerance = 1e-6;  // relative objective decrease
    unsigned threads = 0;
};

struct KMeansResult {
    Dictionary dictionary;
    std::vector<double> objective;  // sum of squared distances after each assignment step
    std::size_t iterations = 0;
};

// k-means++ seeding, then Lloyd iterations. An emptied cluster keeps its
// previous centroid. Throws empty_input with fewer than K distinct rows.
KMeansResult kmeans(const DescriptorMatrix& data, const KMeansOptions& options);

Dictionary build_dictionary(const DescriptorMatrix& data, std::size_t k, std::uint64_t seed,
                            unsigned threads = 0);

// Nearest word by Euclidean distance, lowest index on ties.
std::size_t nearest_word(const Dictionary& dictionary, DescriptorView x);

using BofHistogram = std::vector<double>;

// L1-normalized word counts.
BofHistogram encode(const ImageDescriptors& image, const Dictionary& dictionary);

// sum_k (a_k - b_k)^2 / (a_k + b_k); bins empty in both contribute 0.
double chi_square_distance(std::span<const double> a, std::span<const double> b);

// exp(-gamma * chi_square_distance(a, b)).
double chi_square_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct BaselineConfig {
    std::size_t k = 350;
    std::uint64_t seed = 0;
    double ridge = 1e-2;  // added to the kernel diagonal
    double gamma = 0.0;   // 0 = 1 / mean pairwise chi-square distance
    std::size_t max_iterations = 100;
    unsigned threads = 0;
};

// Kernel ridge one-vs-rest over the chi-square kernel: for each class c,
// (K + ridge*I) a_c = y_c with y in {+1, -1}; decision f_c(h) = sum_i a_ci k(h, h_i).
struct BaselineModel {
    Dictionary dictionary;
    double gamma = 1.0;
    double ridge = 1e-2;
    std::uint64_t seed = 0;
    std::vector<std::string> classes;
    std::vector<BofHistogram> train_histograms;
    std::vector<std::vector<double>> coefficients;  // [class][train image]

    friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

BaselineModel train_baseline(const Dataset& dataset, const BaselineConfig& config);

struct BaselinePrediction {
    std::size_t best = 0;
    std::string class_name;
    std::vector<double> decision_values;
};

BaselinePrediction classify_baseline(const BaselineModel& model, const ImageDescriptors& image);

inline constexpr char kBaselineMagic[4] = {'F', 'B', 'B', 'L'};
inline constexpr std::uint8_t kBaselineVersion = 1;

std::vector<std::uint8_t> serialize_baseline(const BaselineModel& model);
BaselineModel deserialize_baseline(std::span<const std::uint8_t> bytes,
                                   const std::string& source = "baseline");
void save_baseline(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace fuzzyboost
