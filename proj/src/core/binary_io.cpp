#include "core/binary_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace fuzzyboost {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::io: return "I/O error";
        case ErrorCode::malformed_header: return "malformed header";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::non_finite_value: return "non-finite value";
        case ErrorCode::empty_input: return "empty input";
        case ErrorCode::version_mismatch: return "version mismatch";
        case ErrorCode::corrupt: return "corrupt data";
        case ErrorCode::duplicate_class: return "duplicate class";
        case ErrorCode::unknown_class: return "unknown class";
        case ErrorCode::training_failed: return "training failed";
        case ErrorCode::protocol_violation: return "protocol violation";
        case ErrorCode::numeric: return "numeric error";
        case ErrorCode::internal: return "internal error";
    }
    return "unknown error";
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, path.string() + ": cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::io, path.string() + ": read failed");
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) fail(ErrorCode::io, path.string() + ": write failed");
}

std::string read_file_text(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return {bytes.begin(), bytes.end()};
}

void write_file_text(const std::filesystem::path& path, std::string_view text) {
    write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()});
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large buffers.
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
        crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace fuzzyboost
