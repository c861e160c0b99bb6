#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "core/descriptors.hpp"

namespace fuzzyboost {

enum class Split { train, test, unassigned };

const char* to_string(Split split);

struct ManifestImage {
    std::string id;
    std::string class_label;
    std::filesystem::path path;  // relative paths resolve against DatasetManifest::base_dir
    Split split = Split::unassigned;
};

struct DatasetManifest {
    std::vector<std::string> classes;
    std::vector<ManifestImage> images;
    std::size_t dimensionality = 0;
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const ManifestImage& image) const;
    bool has_class(std::string_view name) const;
};

// JSON manifest; schema in docs/formats.md.
DatasetManifest parse_manifest(std::string_view json_text,
                               const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Structural checks: N >= 1, unique class names, every label known, image ids
// unique. With require_split, every image must be assigned to train or test;
// an id present in both splits is reported as test-split leakage.
void validate_manifest(const DatasetManifest& manifest, bool require_split);

// Seeded stratified split. Per class (images ordered by id), round(frac * n)
// images go to test, clamped so each class with >= 2 images keeps at least one
// image on each side.
DatasetManifest stratified_split(const DatasetManifest& manifest, double test_fraction,
                                 std::uint64_t seed);

// Manifest plus loaded descriptors, index-aligned with manifest.images.
class Dataset {
public:
    Dataset(DatasetManifest manifest, std::vector<ImageHandle> images);

    // Reads and validates every referenced descriptor file.
    static Dataset load(const DatasetManifest& manifest, unsigned threads = 0);

    const DatasetManifest& manifest() const { return manifest_; }
    const ImageHandle& image(std::size_t i) const { return images_[i]; }
    std::size_t size() const { return images_.size(); }

    // Indices into manifest().images, ordered by image id.
    std::vector<std::size_t> select(Split split) const;
    std::vector<std::size_t> select(Split split, std::string_view class_label) const;

private:
    DatasetManifest manifest_;
    std::vector<ImageHandle> images_;
};

struct NegativePolicy {
    enum class Kind { all, count, fraction };
    Kind kind = Kind::all;
    double value = 0.0;

    // "all", "count:<n>", "<n>", or "fraction:<f>".
    static NegativePolicy parse(std::string_view text);
    std::string to_string() const;
};

struct LearningSet {
    std::string target_class;
    std::vector<ImageHandle> positives;
    std::vector<ImageHandle> negatives;

    std::size_t dim() const;
    std::size_t positive_descriptor_count() const;  // L_pos
    std::size_t negative_descriptor_count() const;  // L_neg
};

// Positives: every train image of target_class. Negatives: drawn uniformly
// without replacement from the other classes' train images, seeded per class.
// Both lists are ordered by image id.
LearningSet assemble_learning_set(const Dataset& dataset, std::string_view target_class,
                                  const NegativePolicy& policy, std::uint64_t seed);

}  // namespace fuzzyboost
