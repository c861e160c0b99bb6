#include "core/synthetic.hpp"

#include <cstdio>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace fuzzyboost {

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes.empty() || spec.dim == 0 || spec.descriptors_per_image == 0 ||
        spec.train_per_class == 0)
        fail(ErrorCode::invalid_argument, "synthetic spec needs classes, N, descriptors and train images");
    if (!(spec.spread > 0.0)) fail(ErrorCode::invalid_argument, "synthetic spread must be > 0");

    DatasetManifest manifest;
    manifest.classes = spec.classes;
    manifest.dimensionality = spec.dim;
    std::vector<ImageHandle> images;

    const std::size_t per_class = spec.train_per_class + spec.test_per_class;
    const std::size_t classes = spec.classes.size();
    for (std::size_t c = 0; c < classes; ++c) {
        const std::string& name = spec.classes[c];
        Rng rng(spec.seed, "synthetic/" + name);
        std::vector<double> mean(spec.dim, 0.0);
        for (std::size_t n = 0; n < spec.dim; ++n)
            if (n % classes == c) mean[n] = spec.separation * spec.spread;

        for (std::size_t i = 0; i < per_class; ++i) {
            char id[128];
            std::snprintf(id, sizeof id, "%s_%04zu", name.c_str(), i);
            ImageDescriptors image;
            image.image_id = id;
            image.class_label = name;
            image.descriptors = DescriptorMatrix(spec.dim);
            image.descriptors.reserve_rows(spec.descriptors_per_image);
            std::vector<float> row(spec.dim);
            for (std::size_t k = 0; k < spec.descriptors_per_image; ++k) {
                for (std::size_t n = 0; n < spec.dim; ++n)
                    row[n] = static_cast<float>(mean[n] + spec.spread * rng.normal());
                image.descriptors.append(row);
            }

            ManifestImage entry;
            entry.id = id;
            entry.class_label = name;
            entry.path = std::filesystem::path(name) / (std::string(id) + ".fbds");
            entry.split = i < spec.train_per_class ? Split::train : Split::test;
            manifest.images.push_back(std::move(entry));
            images.push_back(std::make_shared<const ImageDescriptors>(std::move(image)));
        }
    }
    return Dataset(std::move(manifest), std::move(images));
}

std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    const Dataset dataset = generate_synthetic(spec);
    std::error_code ec;
    for (const auto& name : spec.classes) {
        std::filesystem::create_directories(dir / name, ec);
        if (ec) fail(ErrorCode::io, (dir / name).string() + ": " + ec.message());
    }
    for (std::size_t i = 0; i < dataset.size(); ++i)
        write_descriptor_file(*dataset.image(i), dir / dataset.manifest().images[i].path);
    const auto manifest_path = dir / "manifest.json";
    save_manifest(dataset.manifest(), manifest_path);
    return manifest_path;
}

}  // namespace fuzzyboost
