#pragma once

// Spatial DVS model: each output channel compares a pixel against the mean of a
// small set of neighbours and ternarizes the difference with two thresholds.

#include <cstdint>
#include <span>
#include <vector>

#include "tbn/sparse_tensor.hpp"

namespace tbn::dvs {

struct Offset {
    int dy = 0;
    int dx = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

struct DvsConfig {
    int id = 5;
    std::vector<std::vector<Offset>> channel_patterns;
    double pos_threshold = 8.0;
    double neg_threshold = -8.0;

    int channels() const { return static_cast<int>(channel_patterns.size()); }
    /// Throws a config error unless neg < 0 < pos and every pattern is non-empty without (0,0).
    void validate() const;
};

struct GrayFrame {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> intensity; // row-major

    std::uint8_t at(int y, int x) const { return intensity[static_cast<std::size_t>(y) * width + x]; }
};

/// Luminance 0.299 R + 0.587 G + 0.114 B, rounded to nearest (halves up), computed in integers.
GrayFrame rgb_to_gray(std::span<const std::uint8_t> r, std::span<const std::uint8_t> g,
                      std::span<const std::uint8_t> b, int height, int width);

/// Output shape (H, W, cfg.channels()). Out-of-frame neighbours replicate the nearest edge pixel.
TernaryTensor encode_frame(const GrayFrame& f, const DvsConfig& cfg);

/// Configurations #1..#5; #5 (two diagonal channels) is the default.
std::vector<DvsConfig> config_catalog();
DvsConfig config_by_id(int id);

struct Thresholds {
    double pos;
    double neg;
};

/// Symmetric thresholds whose mean output density over `frames` lies within 0.01 of `target_density`.
/// Throws a calibration error when no threshold gets that close.
Thresholds calibrate_thresholds(std::span<const GrayFrame> frames, const DvsConfig& cfg, double target_density);

} // namespace tbn::dvs
