#include "core/model_io.hpp"

#include <cstring>
#include <sstream>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace fuzzyboost {

namespace {

void write_ensemble(ByteWriter& out, const ClassEnsemble& ensemble) {
    out.str(ensemble.class_name);
    out.u32(static_cast<std::uint32_t>(ensemble.dim));
    out.u8(static_cast<std::uint8_t>(ensemble.tnorm));
    out.u8(static_cast<std::uint8_t>(ensemble.tconorm));
    out.u32(static_cast<std::uint32_t>(ensemble.rules.size()));
    for (const auto& rule : ensemble.rules) {
        out.f64(rule.importance);
        out.f64(rule.raw_alpha);
        for (const auto& mf : rule.memberships) {
            out.f64(mf.center);
            out.f64(mf.width);
        }
    }
}

ClassEnsemble read_ensemble(ByteReader& in, const std::string& source) {
    ClassEnsemble ensemble;
    ensemble.class_name = in.str();
    ensemble.dim = in.u32();
    const std::uint8_t tnorm = in.u8();
    const std::uint8_t tconorm = in.u8();
    if (tnorm > 1 || tconorm > 1)
        fail(ErrorCode::corrupt, source + ": invalid operator code in ensemble '" +
                                     ensemble.class_name + "'");
    ensemble.tnorm = static_cast<TNorm>(tnorm);
    ensemble.tconorm = static_cast<TConorm>(tconorm);
    const std::uint32_t count = in.u32();
    // Each rule needs at least 16 + 16*N bytes; reject counts the data cannot hold.
    if (std::uint64_t{count} * (16 + 16 * std::uint64_t{ensemble.dim}) > in.remaining())
        fail(ErrorCode::corrupt, source + ": rule count exceeds file size");
    ensemble.rules.resize(count);
    for (auto& rule : ensemble.rules) {
        rule.importance = in.f64();
        rule.raw_alpha = in.f64();
        rule.memberships.resize(ensemble.dim);
        for (auto& mf : rule.memberships) {
            mf.center = in.f64();
            mf.width = in.f64();
        }
    }
    return ensemble;
}

}  // namespace

std::vector<std::uint8_t> serialize_ensemble(const ClassEnsemble& ensemble) {
    ByteWriter out;
    write_ensemble(out, ensemble);
    return out.take();
}

std::vector<std::uint8_t> serialize_model(const MultiClassModel& model) {
    model.validate();
    ByteWriter out;
    out.raw(kModelMagic, 4);
    out.u8(kModelVersion);
    out.u64(model.metadata.seed);
    out.str(model.metadata.config_digest);
    out.str(model.metadata.config);
    out.u32(static_cast<std::uint32_t>(model.ensembles.size()));
    for (const auto& ensemble : model.ensembles) write_ensemble(out, ensemble);
    out.u32(crc32_of(out.bytes()));
    return out.take();
}

MultiClassModel deserialize_model(std::span<const std::uint8_t> bytes, const std::string& source) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
        fail(ErrorCode::malformed_header, source + ": not a fuzzyboost model file");
    if (bytes.size() < 5) fail(ErrorCode::corrupt, source + ": truncated model file");
    if (bytes[4] != kModelVersion)
        fail(ErrorCode::version_mismatch, source + ": model format version " +
                                              std::to_string(bytes[4]) + ", this build reads " +
                                              std::to_string(kModelVersion));
    if (bytes.size() < 5 + 4) fail(ErrorCode::corrupt, source + ": truncated model file");

    const auto body = bytes.first(bytes.size() - 4);
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + body.size(), 4);
    if (crc32_of(body) != stored) fail(ErrorCode::corrupt, source + ": checksum mismatch");

    ByteReader in(body, source);
    in.take(5);
    MultiClassModel model;
    model.metadata.seed = in.u64();
    model.metadata.config_digest = in.str();
    model.metadata.config = in.str();
    const std::uint32_t classes = in.u32();
    for (std::uint32_t c = 0; c < classes; ++c) model.ensembles.push_back(read_ensemble(in, source));
    if (in.remaining() != 0) fail(ErrorCode::corrupt, source + ": trailing bytes in model file");

    try {
        model.validate();
    } catch (const Error& e) {
        fail(ErrorCode::corrupt, source + ": " + e.what());
    }
    return model;
}

void save_model(const MultiClassModel& model, const std::filesystem::path& path) {
    write_file_bytes(path, serialize_model(model));
}

MultiClassModel load_model(const std::filesystem::path& path) {
    return deserialize_model(read_file_bytes(path), path.string());
}

std::string export_model_text(const MultiClassModel& model) {
    std::ostringstream out;
    out.precision(17);
    out << "fuzzyboost model v" << int(kModelVersion) << "\n"
        << "seed " << model.metadata.seed << "\n"
        << "config_digest " << model.metadata.config_digest << "\n"
        << "classes " << model.class_count() << "\n"
        << "dimensionality " << model.dim() << "\n";
    for (const auto& e : model.ensembles) {
        out << "\nclass " << e.class_name << " tnorm=" << to_string(e.tnorm)
            << " tconorm=" << to_string(e.tconorm) << " rules=" << e.rules.size() << "\n";
        for (std::size_t t = 0; t < e.rules.size(); ++t) {
            const auto& r = e.rules[t];
            out << "  rule " << t + 1 << " beta=" << r.importance << " alpha=" << r.raw_alpha
                << "\n    centers";
            for (const auto& mf : r.memberships) out << ' ' << mf.center;
            out << "\n    widths ";
            for (const auto& mf : r.memberships) out << ' ' << mf.width;
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace fuzzyboost
