#pragma once

// Cycle-level model of the sparsity-aware TBN accelerator.
//
// Structure: `pcl_count` processing clusters (one per kernel row) of
// `pe_per_pcl` engines with 32 XOR lanes each. Convolution sweeps a 1x3 input
// window along each row of one 32-channel input group at a time; the window's
// map and value registers are broadcast to every cluster, and cluster r
// convolves them with kernel row r. Row partial sums live in TMP and are
// reloaded whenever a later row (or a later input group) contributes to the
// same output. Input is re-streamed once per 32-channel output group.
//
// Timing is additive: every cycle is attributed to exactly one category.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tbn/bits.hpp"
#include "tbn/golden.hpp"
#include "tbn/network.hpp"
#include "tbn/sparse_tensor.hpp"

namespace tbn::accel {

struct AccelConfig {
    int pcl_count = 3;
    int pe_per_pcl = 6;
    int xor_lanes_per_pe = 32;
    double clock_hz = 10e6;
    int fetch_cycles_per_map_word = 1;
    int fetch_cycles_per_value_bit = 1;
    int fetch_cycles_per_weight_word = 1;
    int tmp_rw_cycles_per_word = 1;
    bool zero_skip_enabled = true;
    bool reorder_enabled = true;
    /// One value bit per element and no sparsity map (binary-input baseline).
    bool dense_value_stream = false;

    void validate() const;

    /// Same pipeline with zero-skipping and reordering off and a dense 1-bit input stream.
    static AccelConfig bnn_baseline(AccelConfig base);
};

/// Registers of one processing engine. Slot i of pma / pwg is one input element;
/// the priority encoder walks slots from the highest index down.
struct PeState {
    BitVector pma;
    std::vector<std::uint8_t> pva;  // value sign bits, consumed front to back
    std::vector<std::uint32_t> pwg; // 32-lane weight word per slot
    std::array<std::int32_t, 32> psum{};
};

struct PeRunResult {
    int cycles = 0;
    int macs = 0; // non-zero elements accumulated
};

/// Runs the priority-encoder MAC loop until PMA is empty. With zero skipping
/// one cycle per set PMA bit; without, one cycle per slot. `order`, when given,
/// receives the slots that were accumulated in processing order.
PeRunResult pe_run(PeState& state, bool zero_skip, std::vector<int>* order = nullptr);

struct WorkloadAssignment {
    std::vector<int> group_counts;
    std::vector<std::pair<int, int>> pe_pairs; // group indices per PE
    std::vector<int> pe_loads;
    int makespan = 0;
    int sort_cycles = 0;
};

/// Requires 2 * pe_count groups. With `reorder`, groups are sorted by count
/// (descending, stable) and PE i takes sorted groups i and 2*pe_count-1-i;
/// otherwise PE i takes groups 2i and 2i+1. Sorting costs one cycle.
WorkloadAssignment balance_workload(std::span<const int> group_counts, int pe_count, bool reorder);

struct LayerTrace {
    std::string name;
    LayerKind kind = LayerKind::Conv3x3;
    std::uint64_t total_cycles = 0;
    std::uint64_t fetch_cycles = 0;
    std::uint64_t mac_cycles = 0;
    std::uint64_t sort_cycles = 0;
    std::uint64_t tmp_cycles = 0;
    std::uint64_t post_cycles = 0; // pooling-ReLU and batch-norm units
    std::uint64_t qnt_cycles = 0;  // comparators plus map/value write-out
    std::vector<std::uint64_t> pe_busy_cycles;
    std::uint64_t executed_macs = 0;
    std::uint64_t skipped_macs = 0;
    std::uint64_t dense_macs = 0;
    double input_density = 0.0;

    std::uint64_t category_sum() const {
        return fetch_cycles + mac_cycles + sort_cycles + tmp_cycles + post_cycles + qnt_cycles;
    }
    /// Busy PE-cycles over available PE-cycles during MAC phases.
    double pe_utilization() const;
};

struct SimReport {
    AccelConfig config;
    std::vector<LayerTrace> layers;
    int label = 0;
    int golden_label = -1;
    std::vector<std::int32_t> logits;

    std::uint64_t total_cycles() const;
    LayerTrace totals() const;
    double wall_time_s() const { return static_cast<double>(total_cycles()) / config.clock_hz; }
};

/// Optional line-oriented "cycle unit event" log.
struct EventLog {
    std::ostream* out = nullptr;
    explicit operator bool() const { return out != nullptr; }
};

struct LayerResult {
    golden::PartialSumTensor output;
    LayerTrace trace;
};

LayerResult simulate_conv_layer(const SparseEncoding& x, const BinaryWeightTensor& w, const AccelConfig& cfg,
                                EventLog log = {}, std::uint64_t start_cycle = 0);
LayerResult simulate_fc_layer(const SparseEncoding& x, const BinaryWeightTensor& w, const AccelConfig& cfg,
                              EventLog log = {}, std::uint64_t start_cycle = 0);

struct NetworkResult {
    int label = 0;
    std::vector<std::int32_t> logits;
    SimReport report;
};

NetworkResult simulate_network(const NetworkConfig& net, const TernaryTensor& x, const AccelConfig& cfg,
                               EventLog log = {});

/// UTF-8 key/value text, one `key = value` per line.
std::string format_report(const SimReport& report);
SimReport parse_report(const std::string& text);

} // namespace tbn::accel
