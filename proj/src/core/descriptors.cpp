#include "core/descriptors.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <string_view>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace fuzzyboost {

namespace {

std::string record_context(const std::string& source, std::size_t record) {
    return source + ": record " + std::to_string(record);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

ImageDescriptors parse_binary(std::span<const std::uint8_t> bytes,
                              const std::string& source) {
    ByteReader in(bytes, source, ErrorCode::malformed_header);
    const auto magic = in.take(4);
    if (std::memcmp(magic.data(), kDescriptorMagic, 4) != 0)
        fail(ErrorCode::malformed_header, source + ": bad magic bytes");
    const std::uint8_t version = in.u8();
    if (version != kDescriptorVersion)
        fail(ErrorCode::malformed_header,
             source + ": unsupported descriptor file version " + std::to_string(version));
    const std::uint32_t dim = in.u32();
    const std::uint32_t count = in.u32();
    if (dim == 0) fail(ErrorCode::malformed_header, source + ": dimensionality N = 0");
    if (count == 0) fail(ErrorCode::empty_input, source + ": empty descriptor list");

    const std::size_t record_bytes = std::size_t{dim} * sizeof(float);
    const std::size_t expected = std::size_t{count} * record_bytes;
    if (in.remaining() != expected) {
        const std::size_t complete = in.remaining() / record_bytes;
        if (in.remaining() < expected)
            fail(ErrorCode::dimension_mismatch,
                 record_context(source, complete) + ": truncated record (expected " +
                     std::to_string(dim) + " values)");
        fail(ErrorCode::dimension_mismatch,
             source + ": " + std::to_string(in.remaining() - expected) +
                 " trailing bytes after record " + std::to_string(count - 1));
    }

    std::vector<float> values(std::size_t{count} * dim);
    const auto payload = in.take(expected);
    std::memcpy(values.data(), payload.data(), expected);

    ImageDescriptors image;
    image.descriptors = DescriptorMatrix(dim, std::move(values));
    return image;
}

ImageDescriptors parse_csv(std::string_view text, const std::string& source) {
    std::size_t line_end = text.find('\n');
    const std::string_view header = trim(text.substr(0, line_end));
    if (header.substr(0, 2) != "N=")
        fail(ErrorCode::malformed_header, source + ": CSV header must be N=<int>");
    std::size_t dim = 0;
    const auto digits = header.substr(2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || dim == 0)
        fail(ErrorCode::malformed_header, source + ": invalid dimensionality in CSV header");

    DescriptorMatrix matrix(dim);
    std::vector<float> row;
    row.reserve(dim);
    std::size_t record = 0;
    while (line_end != std::string_view::npos) {
        const std::size_t start = line_end + 1;
        line_end = text.find('\n', start);
        const std::string_view line = trim(text.substr(start, line_end - start));
        if (line.empty()) continue;

        row.clear();
        std::size_t pos = 0;
        for (;;) {
            const std::size_t comma = line.find(',', pos);
            const std::string_view field = trim(line.substr(pos, comma - pos));
            float value = 0.0f;
            auto res = std::from_chars(field.data(), field.data() + field.size(), value);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                fail(ErrorCode::corrupt, record_context(source, record) +
                                             ": cannot parse value '" + std::string(field) + "'");
            row.push_back(value);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (row.size() != dim)
            fail(ErrorCode::dimension_mismatch,
                 record_context(source, record) + ": has " + std::to_string(row.size()) +
                     " values, header declares N=" + std::to_string(dim));
        matrix.append(row);
        ++record;
    }
    if (matrix.empty()) fail(ErrorCode::empty_input, source + ": empty descriptor list");

    ImageDescriptors image;
    image.descriptors = std::move(matrix);
    return image;
}

}  // namespace

DescriptorMatrix::DescriptorMatrix(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0 || values_.size() % dim_ != 0)
        fail(ErrorCode::dimension_mismatch,
             "descriptor block of " + std::to_string(values_.size()) +
                 " values is not a multiple of N=" + std::to_string(dim_));
}

void DescriptorMatrix::append(DescriptorView row) {
    if (row.size() != dim_)
        fail(ErrorCode::dimension_mismatch,
             "descriptor of length " + std::to_string(row.size()) + ", expected " +
                 std::to_string(dim_));
    values_.insert(values_.end(), row.begin(), row.end());
}

void validate_image(const ImageDescriptors& image, std::size_t expected_dim,
                    const std::string& source) {
    if (image.descriptors.empty())
        fail(ErrorCode::empty_input, source + ": empty descriptor list");
    if (expected_dim != 0 && image.dim() != expected_dim)
        fail(ErrorCode::dimension_mismatch,
             record_context(source, 0) + ": dimensionality " + std::to_string(image.dim()) +
                 " does not match declared N=" + std::to_string(expected_dim));
    const auto values = image.descriptors.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            fail(ErrorCode::non_finite_value,
                 record_context(source, i / image.dim()) + ": non-finite value at component " +
                     std::to_string(i % image.dim()));
    }
}

ImageDescriptors read_descriptor_file(const std::filesystem::path& path,
                                      std::size_t expected_dim) {
    const std::string source = path.string();
    const auto bytes = read_file_bytes(path);

    ImageDescriptors image;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kDescriptorMagic, 4) == 0) {
        image = parse_binary(bytes, source);
    } else if (bytes.size() >= 2 && bytes[0] == 'N' && bytes[1] == '=') {
        image = parse_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, source);
    } else {
        fail(ErrorCode::malformed_header, source + ": unrecognized descriptor file header");
    }
    image.image_id = path.stem().string();
    validate_image(image, expected_dim, source);
    return image;
}

std::vector<std::uint8_t> encode_descriptors_binary(const ImageDescriptors& image) {
    ByteWriter out;
    out.raw(kDescriptorMagic, 4);
    out.u8(kDescriptorVersion);
    out.u32(static_cast<std::uint32_t>(image.dim()));
    out.u32(static_cast<std::uint32_t>(image.count()));
    const auto values = image.descriptors.values();
    out.raw(values.data(), values.size_bytes());
    return out.take();
}

std::string encode_descriptors_csv(const ImageDescriptors& image) {
    std::string text = "N=" + std::to_string(image.dim()) + "\n";
    char buf[64];
    for (std::size_t r = 0; r < image.count(); ++r) {
        const auto row = image.descriptors.row(r);
        for (std::size_t n = 0; n < row.size(); ++n) {
            if (n) text.push_back(',');
            // Shortest representation that parses back to the same float.
            auto res = std::to_chars(buf, buf + sizeof buf, row[n]);
            text.append(buf, res.ptr);
        }
        text.push_back('\n');
    }
    return text;
}

void write_descriptor_file(const ImageDescriptors& image,
                           const std::filesystem::path& path) {
    write_descriptor_file(image, path,
                          path.extension() == ".csv" ? DescriptorFormat::csv
                                                     : DescriptorFormat::binary);
}

void write_descriptor_file(const ImageDescriptors& image,
                           const std::filesystem::path& path, DescriptorFormat format) {
    validate_image(image, 0, image.image_id.empty() ? path.string() : image.image_id);
    if (format == DescriptorFormat::csv) {
        write_file_text(path, encode_descriptors_csv(image));
    } else {
        write_file_bytes(path, encode_descriptors_binary(image));
    }
}

}  // namespace fuzzyboost
