#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/ensemble.hpp"

namespace fuzzyboost {

inline constexpr char kModelMagic[4] = {'F', 'B', 'M', 'D'};
inline constexpr std::uint8_t kModelVersion = 1;

// Layout (little-endian):
//   "FBMD" u8 version
//   u64 seed, str config_digest, str config, u32 V
//   V ensemble blocks (see serialize_ensemble)
//   u32 CRC-32 of every preceding byte
// where str is u32 length + bytes.
std::vector<std::uint8_t> serialize_model(const MultiClassModel& model);
MultiClassModel deserialize_model(std::span<const std::uint8_t> bytes,
                                  const std::string& source = "model");

// str name, u32 N, u8 tnorm, u8 tconorm, u32 T,
// T x (f64 importance, f64 raw_alpha, N x (f64 center, f64 width)).
std::vector<std::uint8_t> serialize_ensemble(const ClassEnsemble& ensemble);

void save_model(const MultiClassModel& model, const std::filesystem::path& path);
MultiClassModel load_model(const std::filesystem::path& path);

// Human-readable dump for inspection; not read back.
std::string export_model_text(const MultiClassModel& model);

}  // namespace fuzzyboost
