#pragma once

// Comparison quantities: activation data size, MAC counts, throughput, energy and FoM.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tbn/accel.hpp"
#include "tbn/network.hpp"
#include "tbn/sparse_tensor.hpp"

namespace tbn::metrics {

/// Reported figure of merit of the fabricated design, %/s/mJ.
inline constexpr double kPublishedFom = 257.9;
/// Reported single-inference time at 10 MHz, seconds.
inline constexpr double kPublishedTimeS = 0.44;
/// Reported throughput; the op-counting convention behind it is unknown.
inline constexpr double kPublishedGops = 46.4;

struct FomInputs {
    double accuracy_pct = 0.0;
    double processing_time_s = 0.0;
    double energy_mj = 0.0;
};

/// accuracy / (time * energy), in % per second per millijoule.
double fom(const FomInputs& in);

/// Piecewise-linear power table (clock Hz -> mW).
class PowerModel {
public:
    PowerModel() = default;
    explicit PowerModel(std::vector<std::pair<double, double>> points);

    /// 1 / 10 / 100 MHz, anchored at 1.6 mW @ 10 MHz.
    static PowerModel defaults();
    static PowerModel parse(const std::string& text);

    /// Outside the table range this throws unless `extrapolate` is set.
    double power_mw(double clock_hz, bool extrapolate = false) const;

    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

inline double energy_mj(double power_mw, double time_s) { return power_mw * time_s; }
double energy_mj(const accel::SimReport& report, const PowerModel& power, bool extrapolate = false);

struct MacLayer {
    std::string name;
    std::uint64_t dense_macs = 0;
    std::uint64_t executed_macs = 0;
};

struct MacStats {
    std::vector<MacLayer> layers;
    std::uint64_t dense_macs = 0;    // conventional CNN
    std::uint64_t bnn_macs = 0;      // binary network processes every input
    std::uint64_t tbn_executed = 0;  // non-zero inputs only

    double reduction() const {
        return dense_macs == 0 ? 0.0 : 1.0 - static_cast<double>(tbn_executed) / static_cast<double>(dense_macs);
    }
};

/// `activations` pairs a conv/FC layer index with that layer's ternary input.
MacStats mac_report(const NetworkConfig& net, std::span<const std::pair<std::size_t, SparseEncoding>> activations);

struct DataReport {
    std::vector<std::pair<std::string, SizeStats>> layers;
    SizeStats total;
};

DataReport data_report(std::span<const std::pair<std::string, SparseEncoding>> activations);

enum class OpsConvention {
    DenseEquivalent, // 2 ops per dense MAC, skipped ones included
    Executed,        // 2 ops per executed MAC
};

double throughput_gops(const accel::SimReport& report, OpsConvention convention);

} // namespace tbn::metrics
