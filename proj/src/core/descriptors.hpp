#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fuzzyboost {

// One local-feature vector. Stored as 32-bit floats, computed on as doubles.
using DescriptorView = std::span<const float>;

// Row-major u x N block of descriptors sharing one dimensionality.
class DescriptorMatrix {
public:
    DescriptorMatrix() = default;
    explicit DescriptorMatrix(std::size_t dim) : dim_(dim) {}
    DescriptorMatrix(std::size_t dim, std::vector<float> values);

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const { return values_.empty(); }

    DescriptorView row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const float> values() const { return values_; }

    void append(DescriptorView row);
    void reserve_rows(std::size_t n) { values_.reserve(n * dim_); }

    friend bool operator==(const DescriptorMatrix&, const DescriptorMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<float> values_;
};

struct ImageDescriptors {
    std::string image_id;
    DescriptorMatrix descriptors;
    std::optional<std::string> class_label;

    std::size_t dim() const { return descriptors.dim(); }
    std::size_t count() const { return descriptors.rows(); }
};

using ImageHandle = std::shared_ptr<const ImageDescriptors>;

// Throws empty_input / non_finite_value / dimension_mismatch naming `source`
// and the offending record index.
void validate_image(const ImageDescriptors& image, std::size_t expected_dim,
                    const std::string& source);

enum class DescriptorFormat { binary, csv };

// Format is detected from content: "FBDS" magic selects binary, a leading
// "N=" line selects CSV. image_id is the file stem. expected_dim = 0 accepts
// whatever the header declares.
ImageDescriptors read_descriptor_file(const std::filesystem::path& path,
                                      std::size_t expected_dim = 0);

// ".csv" extension selects the CSV variant, anything else binary.
void write_descriptor_file(const ImageDescriptors& image,
                           const std::filesystem::path& path);
void write_descriptor_file(const ImageDescriptors& image,
                           const std::filesystem::path& path,
                           DescriptorFormat format);

std::vector<std::uint8_t> encode_descriptors_binary(const ImageDescriptors& image);
std::string encode_descriptors_csv(const ImageDescriptors& image);

inline constexpr char kDescriptorMagic[4] = {'F', 'B', 'D', 'S'};
inline constexpr std::uint8_t kDescriptorVersion = 1;

}  // namespace fuzzyboost
