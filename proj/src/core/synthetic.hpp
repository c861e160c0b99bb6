#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace fuzzyboost {

// Gaussian descriptor clusters, one per class. Class c has mean
// separation * spread on every dimension n with n % V == c and 0 elsewhere;
// descriptors scatter around it with standard deviation `spread`.
struct SyntheticSpec {
    std::vector<std::string> classes{"Bus", "Cat", "Train"};
    std::size_t train_per_class = 30;
    std::size_t test_per_class = 10;
    std::size_t descriptors_per_image = 20;
    std::size_t dim = 16;
    double spread = 1.0;
    double separation = 6.0;  // in units of spread
    std::uint64_t seed = 0;
};

// In-memory dataset; manifest paths are "<class>/<id>.fbds".
Dataset generate_synthetic(const SyntheticSpec& spec);

// Writes descriptor files plus manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace fuzzyboost
