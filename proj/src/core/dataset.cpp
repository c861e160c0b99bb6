#include "core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace fuzzyboost {

using nlohmann::json;

const char* to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

std::filesystem::path DatasetManifest::resolve(const ManifestImage& image) const {
    if (image.path.is_absolute() || base_dir.empty()) return image.path;
    return base_dir / image.path;
}

bool DatasetManifest::has_class(std::string_view name) const {
    return std::find(classes.begin(), classes.end(), name) != classes.end();
}

DatasetManifest parse_manifest(std::string_view json_text,
                               const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::malformed_header, std::string("manifest is not valid JSON: ") + e.what());
    }

    DatasetManifest manifest;
    manifest.base_dir = base_dir;
    try {
        if (doc.contains("format") && doc.at("format") != "fuzzyboost-manifest")
            fail(ErrorCode::malformed_header, "not a fuzzyboost manifest: format " +
                                                  doc.at("format").dump());
        if (doc.contains("version") && doc.at("version").get<int>() != 1)
            fail(ErrorCode::version_mismatch, "unsupported manifest version " +
                                                  doc.at("version").dump());
        manifest.dimensionality = doc.at("dimensionality").get<std::size_t>();
        manifest.classes = doc.at("classes").get<std::vector<std::string>>();
        for (const auto& entry : doc.at("images")) {
            ManifestImage image;
            image.id = entry.at("id").get<std::string>();
            image.class_label = entry.at("class").get<std::string>();
            image.path = entry.at("path").get<std::string>();
            const std::string split = entry.value("split", std::string("unassigned"));
            if (split == "train") {
                image.split = Split::train;
            } else if (split == "test") {
                image.split = Split::test;
            } else if (split == "unassigned") {
                image.split = Split::unassigned;
            } else {
                fail(ErrorCode::invalid_argument,
                     "manifest image '" + image.id + "': unknown split '" + split + "'");
            }
            manifest.images.push_back(std::move(image));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::malformed_header, std::string("manifest schema error: ") + e.what());
    }
    validate_manifest(manifest, false);
    return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    try {
        return parse_manifest(read_file_text(path), path.parent_path());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string manifest_to_json(const DatasetManifest& manifest) {
    json doc;
    doc["format"] = "fuzzyboost-manifest";
    doc["version"] = 1;
    doc["dimensionality"] = manifest.dimensionality;
    doc["classes"] = manifest.classes;
    json images = json::array();
    for (const auto& image : manifest.images) {
        json entry;
        entry["id"] = image.id;
        entry["class"] = image.class_label;
        entry["path"] = image.path.generic_string();
        entry["split"] = to_string(image.split);
        images.push_back(std::move(entry));
    }
    doc["images"] = std::move(images);
    return doc.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    write_file_text(path, manifest_to_json(manifest));
}

void validate_manifest(const DatasetManifest& manifest, bool require_split) {
    if (manifest.dimensionality == 0)
        fail(ErrorCode::invalid_argument, "manifest dimensionality must be >= 1");
    if (manifest.classes.empty()) fail(ErrorCode::empty_input, "manifest lists no classes");

    std::set<std::string_view> classes;
    for (const auto& name : manifest.classes) {
        if (name.empty()) fail(ErrorCode::invalid_argument, "empty class name in manifest");
        if (!classes.insert(name).second)
            fail(ErrorCode::duplicate_class, "class '" + name + "' listed twice in manifest");
    }

    std::unordered_map<std::string_view, Split> seen;
    for (const auto& image : manifest.images) {
        if (!classes.contains(image.class_label))
            fail(ErrorCode::unknown_class, "image '" + image.id + "' has class '" +
                                               image.class_label + "' not listed in classes");
        if (require_split && image.split == Split::unassigned)
            fail(ErrorCode::protocol_violation,
                 "image '" + image.id + "' has no train/test assignment");
        auto [it, inserted] = seen.emplace(image.id, image.split);
        if (!inserted) {
            if (it->second != image.split)
                fail(ErrorCode::protocol_violation,
                     "test-split leakage: image '" + image.id + "' appears in both splits");
            fail(ErrorCode::protocol_violation, "image id '" + image.id + "' listed twice");
        }
    }
}

DatasetManifest stratified_split(const DatasetManifest& manifest, double test_fraction,
                                 std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        fail(ErrorCode::invalid_argument, "test fraction must lie in [0, 1)");
    validate_manifest(manifest, false);

    DatasetManifest out = manifest;
    for (const auto& name : manifest.classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < out.images.size(); ++i)
            if (out.images[i].class_label == name) members.push_back(i);
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return out.images[a].id < out.images[b].id;
        });

        const std::size_t n = members.size();
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * double(n)));
        if (test_fraction > 0.0 && n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
        if (n < 2) n_test = 0;

        Rng rng(seed, "split/" + name);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + rng.below(n - i);
            std::swap(members[i], members[j]);
        }
        for (std::size_t k = 0; k < n; ++k)
            out.images[members[k]].split = k < n_test ? Split::test : Split::train;
    }
    return out;
}

Dataset::Dataset(DatasetManifest manifest, std::vector<ImageHandle> images)
    : manifest_(std::move(manifest)), images_(std::move(images)) {
    if (images_.size() != manifest_.images.size())
        fail(ErrorCode::internal, "dataset images do not align with manifest");
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (!images_[i]) fail(ErrorCode::internal, "dataset image slot is empty");
        validate_image(*images_[i], manifest_.dimensionality, manifest_.images[i].id);
    }
}

Dataset Dataset::load(const DatasetManifest& manifest, unsigned threads) {
    std::vector<ImageHandle> images(manifest.images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) {
        const auto& entry = manifest.images[i];
        auto image = read_descriptor_file(manifest.resolve(entry), manifest.dimensionality);
        image.image_id = entry.id;
        image.class_label = entry.class_label;
        images[i] = std::make_shared<const ImageDescriptors>(std::move(image));
    });
    return Dataset(manifest, std::move(images));
}

std::vector<std::size_t> Dataset::select(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < manifest_.images.size(); ++i)
        if (manifest_.images[i].split == split) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        return manifest_.images[a].id < manifest_.images[b].id;
    });
    return out;
}

std::vector<std::size_t> Dataset::select(Split split, std::string_view class_label) const {
    auto out = select(split);
    std::erase_if(out, [&](std::size_t i) {
        return manifest_.images[i].class_label != class_label;
    });
    return out;
}

NegativePolicy NegativePolicy::parse(std::string_view text) {
    NegativePolicy policy;
    if (text == "all") return policy;

    auto parse_number = [&](std::string_view digits) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(v))
            fail(ErrorCode::invalid_argument,
                 "invalid negative policy '" + std::string(text) + "'");
        return v;
    };

    if (text.starts_with("fraction:")) {
        policy.kind = Kind::fraction;
        policy.value = parse_number(text.substr(9));
        if (!(policy.value > 0.0 && policy.value <= 1.0))
            fail(ErrorCode::invalid_argument, "negative fraction must lie in (0, 1]");
        return policy;
    }
    policy.kind = Kind::count;
    policy.value = parse_number(text.starts_with("count:") ? text.substr(6) : text);
    if (policy.value != std::floor(policy.value) || policy.value < 0.0)
        fail(ErrorCode::invalid_argument, "negative count must be a non-negative integer");
    return policy;
}

std::string NegativePolicy::to_string() const {
    char buf[32];
    switch (kind) {
        case Kind::all: return "all";
        case Kind::count: return "count:" + std::to_string(static_cast<long long>(value));
        case Kind::fraction: {
            auto res = std::to_chars(buf, buf + sizeof buf, value);
            return "fraction:" + std::string(buf, res.ptr);
        }
    }
    return "all";
}

std::size_t LearningSet::dim() const {
    return positives.empty() ? 0 : positives.front()->dim();
}

std::size_t LearningSet::positive_descriptor_count() const {
    std::size_t total = 0;
    for (const auto& image : positives) total += image->count();
    return total;
}

std::size_t LearningSet::negative_descriptor_count() const {
    std::size_t total = 0;
    for (const auto& image : negatives) total += image->count();
    return total;
}

LearningSet assemble_learning_set(const Dataset& dataset, std::string_view target_class,
                                  const NegativePolicy& policy, std::uint64_t seed) {
    const auto& manifest = dataset.manifest();
    if (!manifest.has_class(target_class))
        fail(ErrorCode::unknown_class, "class '" + std::string(target_class) +
                                           "' is not in the manifest");

    LearningSet set;
    set.target_class = std::string(target_class);
    for (std::size_t i : dataset.select(Split::train, target_class))
        set.positives.push_back(dataset.image(i));
    if (set.positives.empty())
        fail(ErrorCode::empty_input,
             "class '" + set.target_class + "' has no positive training images");

    std::vector<std::size_t> pool;
    for (std::size_t i : dataset.select(Split::train))
        if (manifest.images[i].class_label != target_class) pool.push_back(i);
    if (pool.empty())
        fail(ErrorCode::empty_input,
             "class '" + set.target_class + "': negative pool is empty");

    std::size_t wanted = pool.size();
    if (policy.kind == NegativePolicy::Kind::count) {
        wanted = static_cast<std::size_t>(policy.value);
    } else if (policy.kind == NegativePolicy::Kind::fraction) {
        wanted = static_cast<std::size_t>(std::llround(policy.value * double(pool.size())));
    }
    if (wanted == 0)
        fail(ErrorCode::empty_input, "class '" + set.target_class + "': negative policy '" +
                                         policy.to_string() + "' selects no images");
    if (wanted > pool.size())
        fail(ErrorCode::invalid_argument,
             "class '" + set.target_class + "': negative policy asks for " +
                 std::to_string(wanted) + " images but the pool holds " +
                 std::to_string(pool.size()));

    // Partial Fisher-Yates over the id-ordered pool.
    Rng rng(seed, "negatives/" + set.target_class);
    for (std::size_t i = 0; i < wanted; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(wanted);
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        return manifest.images[a].id < manifest.images[b].id;
    });
    for (std::size_t i : pool) set.negatives.push_back(dataset.image(i));
    return set;
}

}  // namespace fuzzyboost
