#include "tbn/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "tbn/error.hpp"

namespace tbn::metrics {

double fom(const FomInputs& in) {
    require(in.accuracy_pct > 0.0 && in.accuracy_pct <= 100.0, ErrorKind::Config, "FoM: accuracy must be in (0, 100]");
    require(in.processing_time_s > 0.0 && in.energy_mj > 0.0, ErrorKind::Config,
            "FoM: time and energy must be positive");
    return in.accuracy_pct / (in.processing_time_s * in.energy_mj);
}

PowerModel::PowerModel(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    std::sort(points_.begin(), points_.end());
    require(!points_.empty(), ErrorKind::Config, "power model needs at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        require(points_[i].first > 0.0 && points_[i].second >= 0.0, ErrorKind::Config,
                "power model points need positive clock and non-negative power");
        if (i > 0) {
            require(points_[i].first > points_[i - 1].first, ErrorKind::Config, "power model has duplicate clocks");
            require(points_[i].second >= points_[i - 1].second, ErrorKind::Config,
                    "power must be non-decreasing in frequency");
        }
    }
}

PowerModel PowerModel::defaults() {
    // Linear in frequency through 1.6 mW @ 10 MHz, with P(100 MHz) / P(1 MHz) = 10^4 / 1291 so that
    // FoM ~ 1 / (t^2 P) improves 1291x across the range.
    const double ratio = 1e4 / 1291.0;
    const double slope = 1.6 / ((100.0 - ratio) / (ratio - 1.0) + 10.0); // mW per MHz
    const double offset = slope * (100.0 - ratio) / (ratio - 1.0);
    auto at = [&](double mhz) { return offset + slope * mhz; };
    return PowerModel({{1e6, at(1.0)}, {10e6, at(10.0)}, {100e6, at(100.0)}});
}

PowerModel PowerModel::parse(const std::string& text) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = line.substr(0, line.find('#'));
        std::istringstream ls(line);
        double hz = 0, mw = 0;
        if (!(ls >> hz)) continue;
        require(static_cast<bool>(ls >> mw), ErrorKind::Config, "power model line needs 'clock_hz milliwatts'");
        pts.emplace_back(hz, mw);
    }
    return PowerModel(std::move(pts));
}

double PowerModel::power_mw(double clock_hz, bool extrapolate) const {
    require(!points_.empty(), ErrorKind::Config, "empty power model");
    const auto& p = points_;
    if (p.size() == 1) {
        require(clock_hz == p[0].first || extrapolate, ErrorKind::Config, "clock outside power table");
        return p[0].second;
    }
    if (clock_hz < p.front().first || clock_hz > p.back().first)
        require(extrapolate, ErrorKind::Config,
                "clock " + std::to_string(clock_hz) + " Hz outside the power table; pass the extrapolation flag");
    std::size_t hi = 1;
    while (hi + 1 < p.size() && clock_hz > p[hi].first) ++hi;
    const auto [f0, p0] = p[hi - 1];
    const auto [f1, p1] = p[hi];
    const double t = (clock_hz - f0) / (f1 - f0);
    return std::max(0.0, p0 + t * (p1 - p0));
}

double energy_mj(const accel::SimReport& report, const PowerModel& power, bool extrapolate) {
    return energy_mj(power.power_mw(report.config.clock_hz, extrapolate), report.wall_time_s());
}

namespace {

int valid_taps(int pos, int extent) {
    int n = 0;
    for (int d = -1; d <= 1; ++d) n += (pos + d >= 0 && pos + d < extent);
    return n;
}

} // namespace

MacStats mac_report(const NetworkConfig& net, std::span<const std::pair<std::size_t, SparseEncoding>> activations) {
    MacStats st;
    for (const auto& [index, enc] : activations) {
        require(index < net.layers.size() && net.layers[index].consumes_ternary(), ErrorKind::Config,
                "mac_report: activation " + std::to_string(index) + " is not a conv/FC input");
        const LayerSpec& layer = net.layers[index];
        require(enc.shape == layer.in_shape, ErrorKind::Format, "mac_report: activation shape mismatch");
        const TernaryTensor t = decode_sparse(enc);
        const std::uint64_t cout = static_cast<std::uint64_t>(layer.out_shape.channels);
        MacLayer ml;
        ml.name = layer.name;
        const Shape s = enc.shape;
        if (layer.kind == LayerKind::Conv3x3) {
            // An input at (y, x) feeds every output whose 3x3 window covers it.
            for (int y = 0; y < s.height; ++y)
                for (int x = 0; x < s.width; ++x) {
                    const std::uint64_t fan = static_cast<std::uint64_t>(valid_taps(y, s.height)) * valid_taps(x, s.width);
                    for (int c = 0; c < s.channels; ++c) {
                        ml.dense_macs += fan * cout;
                        if (t.at(y, x, c) != 0) ml.executed_macs += fan * cout;
                    }
                }
        } else {
            ml.dense_macs = s.elements() * cout;
            ml.executed_macs = t.nonzeros() * cout;
        }
        st.dense_macs += ml.dense_macs;
        st.tbn_executed += ml.executed_macs;
        st.layers.push_back(std::move(ml));
    }
    st.bnn_macs = st.dense_macs;
    return st;
}

DataReport data_report(std::span<const std::pair<std::string, SparseEncoding>> activations) {
    DataReport r;
    for (const auto& [name, enc] : activations) {
        const SizeStats s = size_report(enc);
        r.layers.emplace_back(name, s);
        r.total += s;
    }
    return r;
}

double throughput_gops(const accel::SimReport& report, OpsConvention convention) {
    const double t = report.wall_time_s();
    if (t <= 0.0) return 0.0;
    const auto totals = report.totals();
    const double macs = static_cast<double>(convention == OpsConvention::DenseEquivalent ? totals.dense_macs
                                                                                           : totals.executed_macs);
    return 2.0 * macs / t / 1e9;
}

} // namespace tbn::metrics
