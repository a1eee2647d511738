#include "tbn/dvs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tbn/error.hpp"

namespace tbn::dvs {

void DvsConfig::validate() const {
    require(!channel_patterns.empty(), ErrorKind::Config, "DVS config " + std::to_string(id) + " has no channels");
    require(neg_threshold < 0.0 && pos_threshold > 0.0, ErrorKind::Config,
            "DVS thresholds must satisfy neg < 0 < pos");
    for (const auto& pattern : channel_patterns) {
        require(!pattern.empty(), ErrorKind::Config, "DVS channel without neighbours");
        for (const Offset& o : pattern)
            require(!(o.dy == 0 && o.dx == 0), ErrorKind::Config, "DVS neighbour offset (0,0) is the centre pixel");
    }
}

GrayFrame rgb_to_gray(std::span<const std::uint8_t> r, std::span<const std::uint8_t> g,
                      std::span<const std::uint8_t> b, int height, int width) {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    require(r.size() == n && g.size() == n && b.size() == n, ErrorKind::Format,
            "rgb_to_gray: channel lengths differ from height*width");
    GrayFrame f{height, width, std::vector<std::uint8_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned weighted = 299u * r[i] + 587u * g[i] + 114u * b[i];
        f.intensity[i] = static_cast<std::uint8_t>((weighted + 500u) / 1000u);
    }
    return f;
}

namespace {

int clamp_index(int v, int hi) { return std::clamp(v, 0, hi - 1); }

// count * centre - sum(neighbours); the neighbour mean exceeds the threshold
// exactly when this exceeds threshold * count.
template <typename Fn>
void for_each_scaled_diff(const GrayFrame& f, const DvsConfig& cfg, Fn&& fn) {
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const int centre = f.at(y, x);
            for (int ch = 0; ch < cfg.channels(); ++ch) {
                const auto& pattern = cfg.channel_patterns[ch];
                int sum = 0;
                for (const Offset& o : pattern)
                    sum += f.at(clamp_index(y + o.dy, f.height), clamp_index(x + o.dx, f.width));
                const int count = static_cast<int>(pattern.size());
                fn(y, x, ch, count * centre - sum, count);
            }
        }
}

} // namespace

TernaryTensor encode_frame(const GrayFrame& f, const DvsConfig& cfg) {
    cfg.validate();
    require(f.height > 0 && f.width > 0 && f.intensity.size() == static_cast<std::size_t>(f.height) * f.width,
            ErrorKind::Format, "encode_frame: malformed frame");
    TernaryTensor out(Shape{f.height, f.width, cfg.channels()});
    for_each_scaled_diff(f, cfg, [&](int y, int x, int ch, int scaled, int count) {
        if (scaled > cfg.pos_threshold * count)
            out.set(y, x, ch, 1);
        else if (scaled < cfg.neg_threshold * count)
            out.set(y, x, ch, -1);
    });
    return out;
}

std::vector<DvsConfig> config_catalog() {
    using P = std::vector<Offset>;
    const P diag_main{{-1, -1}, {1, 1}};
    const P diag_anti{{-1, 1}, {1, -1}};
    const P horizontal{{0, -1}, {0, 1}};
    const P vertical{{-1, 0}, {1, 0}};
    return {
        DvsConfig{1, {diag_main}},
        DvsConfig{2, {horizontal, vertical}},
        DvsConfig{3, {vertical, diag_main}},
        DvsConfig{4, {horizontal, diag_anti}},
        DvsConfig{5, {diag_main, diag_anti}},
    };
}

DvsConfig config_by_id(int id) {
    for (auto& c : config_catalog())
        if (c.id == id) return c;
    fail(ErrorKind::Config, "unknown DVS configuration #" + std::to_string(id));
}

Thresholds calibrate_thresholds(std::span<const GrayFrame> frames, const DvsConfig& cfg, double target_density) {
    require(target_density > 0.0 && target_density < 1.0, ErrorKind::Config, "target density must be in (0, 1)");
    std::vector<double> magnitudes;
    for (const GrayFrame& f : frames)
        for_each_scaled_diff(f, cfg, [&](int, int, int, int scaled, int count) {
            magnitudes.push_back(std::abs(static_cast<double>(scaled)) / count);
        });
    require(!magnitudes.empty(), ErrorKind::Calibration, "calibration needs at least one frame");
    std::sort(magnitudes.begin(), magnitudes.end());
    const double n = static_cast<double>(magnitudes.size());

    // Candidate thresholds sit midway between consecutive distinct magnitudes; the
    // density at a candidate is the fraction of magnitudes strictly above it.
    double best_threshold = 0.0;
    double best_error = 2.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < magnitudes.size();) {
        const double v = magnitudes[i];
        if (v > 0.0) {
            const double density = (n - static_cast<double>(i)) / n;
            const double err = std::abs(density - target_density);
            if (err < best_error) {
                best_error = err;
                best_threshold = 0.5 * (prev + v);
            }
        }
        prev = v;
        while (i < magnitudes.size() && magnitudes[i] == v) ++i;
    }
    if (best_error > 0.01)
        fail(ErrorKind::Calibration, "cannot reach density " + std::to_string(target_density) +
                                         " (closest achievable is off by " + std::to_string(best_error) + ")");
    return {best_threshold, -best_threshold};
}

} // namespace tbn::dvs
