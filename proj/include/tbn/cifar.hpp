#pragma once

// CIFAR-10 binary batches: per record one label byte then 1024 R, 1024 G and
// 1024 B bytes, each plane row-major 32x32.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tbn/dvs.hpp"

namespace tbn::cifar {

inline constexpr int kSide = 32;
inline constexpr std::size_t kPlane = kSide * kSide;
inline constexpr std::size_t kRecordBytes = 1 + 3 * kPlane;

struct Record {
    std::uint8_t label = 0;
    std::array<std::uint8_t, 3 * kPlane> pixels{};

    dvs::GrayFrame gray() const;
};

/// Throws a format error naming the byte offset of a truncated trailing record.
std::vector<Record> parse(std::span<const std::uint8_t> bytes);

} // namespace tbn::cifar
