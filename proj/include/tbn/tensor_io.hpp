#pragma once

// Binary file formats (all little-endian):
//
//   TBNT  sparse ternary tensor   "TBNT" u16 version, u16 H, u16 W, u16 C, map bits, value bits
//   TBNW  binary weights          "TBNW" u16 version, u8 kh, u8 kw, u16 C_in, u16 C_out, weight bits
//   TBNP  per-channel parameters  "TBNP" u16 version, u16 channels, i16 payload
//   TBNA  tensor archive          "TBNA" u16 version, u16 reserved, u32 count, index, TBNT blobs
//
// Bit payloads are padded with zero bits to a byte boundary. Map and value bits
// are stored in channel-group-major traversal order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tbn/sparse_tensor.hpp"

namespace tbn::io {

inline constexpr std::uint16_t kFormatVersion = 1;

std::vector<std::uint8_t> serialize_tensor(const SparseEncoding& s);
SparseEncoding deserialize_tensor(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_weights(const BinaryWeightTensor& w);
BinaryWeightTensor deserialize_weights(std::span<const std::uint8_t> bytes);

/// `values_per_channel` is 1 for batch-norm factors, 2 for (pos, neg) threshold pairs.
std::vector<std::uint8_t> serialize_params(std::span<const std::int16_t> values, int channels);
std::vector<std::int16_t> deserialize_params(std::span<const std::uint8_t> bytes, int values_per_channel);

struct ArchiveEntry {
    SparseEncoding tensor;
    std::optional<std::uint8_t> label;
};

std::vector<std::uint8_t> serialize_archive(std::span<const ArchiveEntry> entries);
std::vector<ArchiveEntry> deserialize_archive(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

inline SparseEncoding load_tensor(const std::filesystem::path& p) { return deserialize_tensor(read_file(p)); }
inline void save_tensor(const std::filesystem::path& p, const SparseEncoding& s) { write_file(p, serialize_tensor(s)); }
inline BinaryWeightTensor load_weights(const std::filesystem::path& p) { return deserialize_weights(read_file(p)); }
inline void save_weights(const std::filesystem::path& p, const BinaryWeightTensor& w) { write_file(p, serialize_weights(w)); }
inline std::vector<ArchiveEntry> load_archive(const std::filesystem::path& p) { return deserialize_archive(read_file(p)); }
inline void save_archive(const std::filesystem::path& p, std::span<const ArchiveEntry> e) { write_file(p, serialize_archive(e)); }

} // namespace tbn::io
