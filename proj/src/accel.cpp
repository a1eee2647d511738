#include "tbn/accel.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>

#include "tbn/error.hpp"
#include "tbn/kernels.hpp"

namespace tbn::accel {

void AccelConfig::validate() const {
    require(pcl_count > 0 && pe_per_pcl > 0, ErrorKind::Config, "PCL and PE counts must be positive");
    require(xor_lanes_per_pe == kernels::kLanes, ErrorKind::Config, "PEs have exactly 32 XOR lanes (one weight word)");
    require(clock_hz > 0.0, ErrorKind::Config, "clock frequency must be positive");
    require(fetch_cycles_per_map_word >= 0 && fetch_cycles_per_value_bit >= 0 && fetch_cycles_per_weight_word >= 0 &&
                tmp_rw_cycles_per_word >= 0,
            ErrorKind::Config, "per-access cycle costs must be non-negative");
}

AccelConfig AccelConfig::bnn_baseline(AccelConfig base) {
    base.zero_skip_enabled = false;
    base.reorder_enabled = false;
    base.dense_value_stream = true;
    return base;
}

namespace {

int highest_set(const BitVector& bits) {
    const auto words = bits.words();
    for (std::size_t i = words.size(); i-- > 0;)
        if (words[i]) return static_cast<int>(i * 64 + 63 - std::countl_zero(words[i]));
    return -1;
}

} // namespace

PeRunResult pe_run(PeState& s, bool zero_skip, std::vector<int>* order) {
    require(s.pwg.size() == s.pma.size(), ErrorKind::Format, "PE: weight register size differs from PMA");
    const auto& k = kernels::active();
    PeRunResult r;
    std::size_t head = 0;
    auto accumulate = [&](int slot) {
        if (head >= s.pva.size())
            fail(ErrorKind::Format, "PE: value queue underrun at PMA slot " + std::to_string(slot));
        k.xor_accumulate32(s.psum.data(), s.pwg[slot], s.pva[head++] != 0);
        s.pma.set(slot, false);
        ++r.macs;
        if (order) order->push_back(slot);
    };
    if (zero_skip) {
        for (int top = highest_set(s.pma); top >= 0; top = highest_set(s.pma)) {
            accumulate(top);
            ++r.cycles;
        }
    } else {
        for (int slot = static_cast<int>(s.pma.size()) - 1; slot >= 0; --slot) {
            ++r.cycles;
            if (s.pma[slot]) accumulate(slot);
        }
    }
    if (head != s.pva.size())
        fail(ErrorKind::Format, "PE: " + std::to_string(s.pva.size() - head) + " value bits left after PMA drained");
    s.pva.clear();
    return r;
}

WorkloadAssignment balance_workload(std::span<const int> group_counts, int pe_count, bool reorder) {
    require(pe_count > 0 && group_counts.size() == static_cast<std::size_t>(2 * pe_count), ErrorKind::Config,
            "balance_workload needs exactly 2 groups per PE");
    WorkloadAssignment a;
    a.group_counts.assign(group_counts.begin(), group_counts.end());
    std::vector<int> order(group_counts.size());
    std::iota(order.begin(), order.end(), 0);
    if (reorder) {
        std::stable_sort(order.begin(), order.end(),
                         [&](int l, int r) { return group_counts[l] > group_counts[r]; });
        a.sort_cycles = 1;
    }
    const int groups = 2 * pe_count;
    for (int pe = 0; pe < pe_count; ++pe) {
        const auto pair = reorder ? std::pair{order[pe], order[groups - 1 - pe]} : std::pair{2 * pe, 2 * pe + 1};
        a.pe_pairs.push_back(pair);
        a.pe_loads.push_back(group_counts[pair.first] + group_counts[pair.second]);
    }
    a.makespan = *std::max_element(a.pe_loads.begin(), a.pe_loads.end());
    return a;
}

double LayerTrace::pe_utilization() const {
    if (pe_busy_cycles.empty() || mac_cycles == 0) return 0.0;
    const auto busy = std::accumulate(pe_busy_cycles.begin(), pe_busy_cycles.end(), std::uint64_t{0});
    return static_cast<double>(busy) / (static_cast<double>(mac_cycles) * static_cast<double>(pe_busy_cycles.size()));
}

std::uint64_t SimReport::total_cycles() const {
    std::uint64_t t = 0;
    for (const auto& l : layers) t += l.total_cycles;
    return t;
}

LayerTrace SimReport::totals() const {
    LayerTrace t;
    t.name = "total";
    for (const auto& l : layers) {
        t.total_cycles += l.total_cycles;
        t.fetch_cycles += l.fetch_cycles;
        t.mac_cycles += l.mac_cycles;
        t.sort_cycles += l.sort_cycles;
        t.tmp_cycles += l.tmp_cycles;
        t.post_cycles += l.post_cycles;
        t.qnt_cycles += l.qnt_cycles;
        t.executed_macs += l.executed_macs;
        t.skipped_macs += l.skipped_macs;
        t.dense_macs += l.dense_macs;
        if (t.pe_busy_cycles.size() < l.pe_busy_cycles.size()) t.pe_busy_cycles.resize(l.pe_busy_cycles.size(), 0);
        for (std::size_t i = 0; i < l.pe_busy_cycles.size(); ++i) t.pe_busy_cycles[i] += l.pe_busy_cycles[i];
    }
    return t;
}

namespace {

// Cycle bookkeeping shared by the layer simulators.
class Clock {
public:
    Clock(LayerTrace& trace, std::uint64_t start, EventLog log) : trace_(trace), now_(start), start_(start), log_(log) {}

    void fetch(std::uint64_t c) { add(trace_.fetch_cycles, c); }
    void mac(std::uint64_t c) { add(trace_.mac_cycles, c); }
    void sort(std::uint64_t c) { add(trace_.sort_cycles, c); }
    void tmp(std::uint64_t c) { add(trace_.tmp_cycles, c); }
    void post(std::uint64_t c) { add(trace_.post_cycles, c); }
    void qnt(std::uint64_t c) { add(trace_.qnt_cycles, c); }

    template <typename... Parts>
    void event(const char* unit, const Parts&... parts) {
        if (!log_) return;
        *log_.out << now_ << ' ' << unit << ' ';
        (*log_.out << ... << parts);
        *log_.out << '\n';
    }

    void finish() { trace_.total_cycles = now_ - start_; }

private:
    void add(std::uint64_t& category, std::uint64_t c) {
        category += c;
        now_ += c;
    }

    LayerTrace& trace_;
    std::uint64_t now_;
    std::uint64_t start_;
    EventLog log_;
};

// Serial reader over the VAL FIFO; rewound whenever the input is re-streamed.
class ValueFifo {
public:
    explicit ValueFifo(const BitVector& bits) : bits_(bits) {}
    void rewind() { head_ = 0; }
    bool pop() {
        if (head_ >= bits_.size()) fail(ErrorKind::Format, "VAL FIFO underrun: map and value stream disagree");
        return bits_[head_++];
    }
    bool drained() const { return head_ == bits_.size(); }

private:
    const BitVector& bits_;
    std::size_t head_ = 0;
};

// One map word worth of input held in RMA/RVA: up to 32 channels of one position.
struct ColumnRegister {
    std::uint32_t map = 0;
    int width = 0;
    std::array<std::uint8_t, kChannelGroup> sign{}; // per channel, valid where map bit set
};

struct WindowElement {
    int column;  // index into the window's column registers
    int channel; // channel within the group
    bool nonzero;
    bool sign;
};

// Reads one MAP word and its value bits into a column register, charging fetch cycles.
ColumnRegister fetch_column(std::uint32_t map_word, int width, ValueFifo& fifo, const AccelConfig& cfg, Clock& clk,
                            std::size_t address) {
    ColumnRegister col;
    col.map = map_word;
    col.width = width;
    const int nnz = std::popcount(map_word);
    for (int ch = 0; ch < width; ++ch)
        if ((map_word >> ch) & 1u) col.sign[ch] = fifo.pop() ? 1 : 0;
    if (cfg.dense_value_stream) {
        clk.event("VAL", "read bits=", width, " dense");
        clk.fetch(static_cast<std::uint64_t>(width) * cfg.fetch_cycles_per_value_bit);
    } else {
        clk.event("MAP", "fetch addr=", address);
        clk.fetch(cfg.fetch_cycles_per_map_word);
        clk.event("VAL", "read bits=", nnz);
        clk.fetch(static_cast<std::uint64_t>(nnz) * cfg.fetch_cycles_per_value_bit);
    }
    return col;
}

// Slices the window into 2 * PE groups, balances them, and runs every PE of one
// cluster. `weight_of(element)` yields the cluster's weight word for an element.
class ClusterRunner {
public:
    explicit ClusterRunner(const AccelConfig& cfg) : cfg_(cfg), pes_(cfg.pe_per_pcl) {}

    void slice(std::span<const WindowElement> elems) {
        const int groups = 2 * cfg_.pe_per_pcl;
        const int n = static_cast<int>(elems.size());
        bounds_.assign(groups + 1, 0);
        counts_.assign(groups, 0);
        nonzeros_ = 0;
        for (int g = 0; g <= groups; ++g) bounds_[g] = static_cast<int>(static_cast<long>(g) * n / groups);
        for (int g = 0; g < groups; ++g)
            for (int i = bounds_[g]; i < bounds_[g + 1]; ++i) {
                if (elems[i].nonzero) {
                    ++nonzeros_;
                    if (cfg_.zero_skip_enabled) ++counts_[g];
                }
                if (!cfg_.zero_skip_enabled) ++counts_[g];
            }
        assignment_ = balance_workload(counts_, cfg_.pe_per_pcl, cfg_.reorder_enabled);
    }

    const WorkloadAssignment& assignment() const { return assignment_; }
    int nonzeros() const { return nonzeros_; }

    template <typename WeightOf>
    std::array<std::int32_t, 32> run(std::span<const WindowElement> elems, WeightOf&& weight_of,
                                     std::vector<std::uint64_t>* busy) {
        std::array<std::int32_t, 32> sum{};
        for (int p = 0; p < cfg_.pe_per_pcl; ++p) {
            PeState& pe = pes_[p];
            const auto [ga, gb] = assignment_.pe_pairs[p];
            const int size = (bounds_[ga + 1] - bounds_[ga]) + (bounds_[gb + 1] - bounds_[gb]);
            pe.pma = BitVector(static_cast<std::size_t>(size));
            pe.pwg.assign(static_cast<std::size_t>(size), 0u);
            pe.pva.clear();
            pe.psum.fill(0);
            // Stream order maps onto descending slots so the priority encoder consumes values in FIFO order.
            int slot = size - 1;
            for (int g : {ga, gb})
                for (int i = bounds_[g]; i < bounds_[g + 1]; ++i, --slot) {
                    pe.pwg[slot] = weight_of(elems[i]);
                    if (elems[i].nonzero) {
                        pe.pma.set(slot, true);
                        pe.pva.push_back(elems[i].sign ? 1 : 0);
                    }
                }
            const PeRunResult r = pe_run(pe, cfg_.zero_skip_enabled);
            if (r.cycles != assignment_.pe_loads[p])
                fail(ErrorKind::Mismatch, "PE cycle count disagrees with the workload assignment");
            if (busy) (*busy)[p] += static_cast<std::uint64_t>(r.cycles);
            for (int lane = 0; lane < 32; ++lane) sum[lane] += pe.psum[lane];
        }
        return sum;
    }

private:
    const AccelConfig& cfg_;
    std::vector<PeState> pes_;
    std::vector<int> bounds_;
    std::vector<int> counts_;
    int nonzeros_ = 0;
    WorkloadAssignment assignment_;
};

SparseEncoding canonical(const SparseEncoding& x) {
    x.validate();
    if (x.order == TraversalOrder::ChannelGroupMajor) return x;
    return encode_sparse(decode_sparse(x), TraversalOrder::ChannelGroupMajor);
}

} // namespace

LayerResult simulate_conv_layer(const SparseEncoding& input, const BinaryWeightTensor& w, const AccelConfig& cfg,
                                EventLog log, std::uint64_t start_cycle) {
    cfg.validate();
    const SparseEncoding x = canonical(input);
    require(w.kernel_h() == 3 && w.kernel_w() == 3, ErrorKind::Config, "conv simulation needs a 3x3 kernel");
    require(cfg.pcl_count == w.kernel_h(), ErrorKind::Config, "conv needs one PCL per kernel row (3)");
    require(w.in_channels() == x.shape.channels, ErrorKind::Config, "conv: weight in_channels mismatch");

    const int H = x.shape.height, W = x.shape.width, cin = x.shape.channels, cout = w.out_channels();
    const int gin = channel_groups(cin), gout = channel_groups(cout);
    const std::size_t positions = x.shape.positions();
    const MemoryImage map = pack_map_memory(x);
    const MemoryImage wgh = pack_weight_memory(w);

    LayerResult result;
    LayerTrace& tr = result.trace;
    tr.kind = LayerKind::Conv3x3;
    tr.pe_busy_cycles.assign(cfg.pe_per_pcl, 0);
    tr.input_density = x.density();
    result.output = golden::PartialSumTensor(Shape{H, W, cout});

    Clock clk(tr, start_cycle, log);
    ValueFifo fifo(x.value_bits);
    std::vector<ClusterRunner> clusters;
    for (int r = 0; r < cfg.pcl_count; ++r) clusters.emplace_back(cfg);
    std::vector<std::int32_t> tmp(positions * 32);
    std::vector<std::uint8_t> tmp_live(positions);
    std::vector<WindowElement> elems;
    elems.reserve(3 * kChannelGroup);

    for (int og = 0; og < gout; ++og) {
        const int lanes = std::min(kChannelGroup, cout - og * kChannelGroup);
        std::fill(tmp.begin(), tmp.end(), 0);
        std::fill(tmp_live.begin(), tmp_live.end(), 0);
        fifo.rewind();
        for (int ig = 0; ig < gin; ++ig) {
            const int width = std::min(kChannelGroup, cin - ig * kChannelGroup);
            clk.event("WGH", "load og=", og, " ig=", ig, " words=", 9 * width);
            clk.fetch(static_cast<std::uint64_t>(9) * width * cfg.fetch_cycles_per_weight_word);
            for (int y = 0; y < H; ++y) {
                std::array<ColumnRegister, 3> window{}; // columns x-1, x, x+1
                auto load = [&](int col) {
                    const std::size_t addr = static_cast<std::size_t>(ig) * positions + static_cast<std::size_t>(y) * W + col;
                    return fetch_column(map.words[addr], width, fifo, cfg, clk, addr);
                };
                window[1] = load(0);
                for (int xc = 0; xc < W; ++xc) {
                    if (xc > 0) {
                        window[0] = window[1];
                        window[1] = window[2];
                    }
                    window[2] = xc + 1 < W ? load(xc + 1) : ColumnRegister{};
                    if (xc == 0) window[0] = ColumnRegister{};

                    elems.clear();
                    for (int c = 0; c < 3; ++c) {
                        const int col = xc - 1 + c;
                        if (col < 0 || col >= W) continue;
                        for (int ch = 0; ch < width; ++ch) {
                            const bool nz = (window[c].map >> ch) & 1u;
                            elems.push_back({c, ch, nz, nz && window[c].sign[ch] != 0});
                        }
                    }
                    const std::uint64_t n = elems.size();

                    int makespan = 0;
                    int nnz = 0;
                    for (int r = 0; r < cfg.pcl_count; ++r) {
                        const int oy = y + 1 - r;
                        if (oy < 0 || oy >= H) continue;
                        ClusterRunner& pcl = clusters[r];
                        pcl.slice(elems);
                        makespan = pcl.assignment().makespan;
                        nnz = pcl.nonzeros();
                        const auto weight_of = [&](const WindowElement& e) {
                            return wgh.words[weight_word_address(w, r, og, e.column, ig * kChannelGroup + e.channel)];
                        };
                        const auto partial = pcl.run(elems, weight_of, r == 1 ? &tr.pe_busy_cycles : nullptr);

                        const std::size_t pos = static_cast<std::size_t>(oy) * W + xc;
                        if (tmp_live[pos]) clk.tmp(cfg.tmp_rw_cycles_per_word);
                        for (int lane = 0; lane < lanes; ++lane) {
                            auto& acc = tmp[pos * 32 + lane];
                            acc = golden::checked_psum(std::int64_t{acc} + partial[lane]);
                        }
                        clk.tmp(cfg.tmp_rw_cycles_per_word);
                        tmp_live[pos] = 1;

                        const std::uint64_t zeros = n - static_cast<std::uint64_t>(nnz);
                        if (cfg.zero_skip_enabled) {
                            tr.executed_macs += static_cast<std::uint64_t>(nnz) * lanes;
                            tr.skipped_macs += zeros * lanes;
                        } else {
                            tr.executed_macs += n * lanes;
                        }
                    }
                    clk.event("PCL", "window og=", og, " ig=", ig, " y=", y, " x=", xc, " nnz=", nnz,
                              " makespan=", makespan);
                    clk.mac(static_cast<std::uint64_t>(makespan));
                    if (cfg.reorder_enabled && makespan > 0) clk.sort(1);
                }
            }
        }
        if (!fifo.drained()) fail(ErrorKind::Format, "VAL FIFO not drained after an output-group pass");
        for (std::size_t pos = 0; pos < positions; ++pos)
            for (int lane = 0; lane < lanes; ++lane)
                result.output.values[pos * cout + og * kChannelGroup + lane] =
                    static_cast<std::int16_t>(tmp[pos * 32 + lane]);
    }
    tr.dense_macs = tr.executed_macs + tr.skipped_macs;
    clk.finish();
    return result;
}

LayerResult simulate_fc_layer(const SparseEncoding& input, const BinaryWeightTensor& w, const AccelConfig& cfg,
                              EventLog log, std::uint64_t start_cycle) {
    cfg.validate();
    const SparseEncoding x = canonical(input);
    const std::size_t n_in = x.shape.elements();
    require(w.kernel_h() == 1 && w.kernel_w() == 1 && static_cast<std::size_t>(w.in_channels()) == n_in,
            ErrorKind::Config, "fc: weight tensor does not match flattened input");
    const int cout = w.out_channels();
    const int gout = channel_groups(cout);
    const int cin = x.shape.channels;
    const std::size_t positions = x.shape.positions();
    const MemoryImage map = pack_map_memory(x);
    const MemoryImage wgh = pack_weight_memory(w);
    const Traversal trav(x.shape, TraversalOrder::ChannelGroupMajor);

    LayerResult result;
    LayerTrace& tr = result.trace;
    tr.kind = LayerKind::FullyConnected;
    tr.pe_busy_cycles.assign(cfg.pe_per_pcl, 0);
    tr.input_density = x.density();
    result.output = golden::PartialSumTensor(Shape{1, 1, cout});

    Clock clk(tr, start_cycle, log);
    ValueFifo fifo(x.value_bits);
    std::vector<ClusterRunner> clusters;
    for (int r = 0; r < cfg.pcl_count; ++r) clusters.emplace_back(cfg);
    constexpr int kWindowWords = 3;
    const std::size_t words = map.words.size();

    // Clusters gang on disjoint output groups; the input is streamed once per round.
    for (int first = 0; first < gout; first += cfg.pcl_count) {
        const int active = std::min(cfg.pcl_count, gout - first);
        std::vector<std::array<std::int32_t, 32>> acc(active);
        fifo.rewind();
        std::vector<WindowElement> elems;
        std::vector<std::size_t> flat; // flattened input index per window element
        for (std::size_t w0 = 0; w0 < words; w0 += kWindowWords) {
            const int span_words = static_cast<int>(std::min<std::size_t>(kWindowWords, words - w0));
            std::array<ColumnRegister, kWindowWords> regs{};
            elems.clear();
            flat.clear();
            for (int c = 0; c < span_words; ++c) {
                const std::size_t addr = w0 + c;
                const int group = static_cast<int>(addr / positions);
                const std::size_t pos = addr % positions;
                const int width = std::min(kChannelGroup, cin - group * kChannelGroup);
                regs[c] = fetch_column(map.words[addr], width, fifo, cfg, clk, addr);
                for (int ch = 0; ch < width; ++ch) {
                    const bool nz = (regs[c].map >> ch) & 1u;
                    elems.push_back({c, ch, nz, nz && regs[c].sign[ch] != 0});
                    flat.push_back(trav.index(pos, group * kChannelGroup + ch));
                }
            }
            const std::uint64_t n = elems.size();
            clk.event("WGH", "load words=", n * active);
            clk.fetch(n * active * cfg.fetch_cycles_per_weight_word);

            int makespan = 0;
            int nnz = 0;
            for (int p = 0; p < active; ++p) {
                const int og = first + p;
                const int lanes = std::min(kChannelGroup, cout - og * kChannelGroup);
                ClusterRunner& pcl = clusters[p];
                pcl.slice(elems);
                makespan = pcl.assignment().makespan;
                nnz = pcl.nonzeros();
                const auto weight_of = [&](const WindowElement& e) {
                    const std::size_t i = flat[static_cast<std::size_t>(&e - elems.data())];
                    return wgh.words[weight_word_address(w, 0, og, 0, static_cast<int>(i))];
                };
                const auto partial = pcl.run(elems, weight_of, p == 0 ? &tr.pe_busy_cycles : nullptr);
                for (int lane = 0; lane < 32; ++lane) acc[p][lane] += partial[lane];
                const std::uint64_t zeros = n - static_cast<std::uint64_t>(nnz);
                if (cfg.zero_skip_enabled) {
                    tr.executed_macs += static_cast<std::uint64_t>(nnz) * lanes;
                    tr.skipped_macs += zeros * lanes;
                } else {
                    tr.executed_macs += n * lanes;
                }
            }
            clk.event("PCL", "fc window word=", w0, " nnz=", nnz, " makespan=", makespan);
            clk.mac(static_cast<std::uint64_t>(makespan));
            if (cfg.reorder_enabled && makespan > 0) clk.sort(1);
        }
        if (!fifo.drained()) fail(ErrorKind::Format, "VAL FIFO not drained after an FC round");
        for (int p = 0; p < active; ++p) {
            const int og = first + p;
            const int lanes = std::min(kChannelGroup, cout - og * kChannelGroup);
            for (int lane = 0; lane < lanes; ++lane)
                result.output.values[og * kChannelGroup + lane] = golden::checked_psum(acc[p][lane]);
            clk.event("TMP", "write og=", og);
            clk.tmp(cfg.tmp_rw_cycles_per_word);
        }
    }
    tr.dense_macs = tr.executed_macs + tr.skipped_macs;
    clk.finish();
    return result;
}

namespace {

std::uint64_t lane_words(const Shape& s) {
    return static_cast<std::uint64_t>(s.positions()) * static_cast<std::uint64_t>(channel_groups(s.channels));
}

golden::PartialSumTensor plr_unit(const golden::PartialSumTensor& in, const AccelConfig& cfg, Clock& clk) {
    const Shape os{in.shape.height / 2, in.shape.width / 2, in.shape.channels};
    golden::PartialSumTensor out(os);
    for (int y = 0; y < os.height; ++y)
        for (int x = 0; x < os.width; ++x)
            for (int c = 0; c < os.channels; ++c) {
                std::int16_t best = 0; // ReLU floor folded into the comparator seed
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) best = std::max(best, in.at(2 * y + dy, 2 * x + dx, c));
                out.values[out.index(y, x, c)] = best;
            }
    const std::uint64_t words = lane_words(os);
    clk.tmp(5 * words * cfg.tmp_rw_cycles_per_word); // four reads and one write per pooled word
    clk.post(words);
    return out;
}

golden::PartialSumTensor bnm_unit(const golden::PartialSumTensor& in, std::span<const std::int16_t> factors,
                                  const AccelConfig& cfg, Clock& clk) {
    golden::PartialSumTensor out(in.shape);
    const int channels = in.shape.channels;
    for (std::size_t i = 0; i < in.values.size(); ++i) {
        const std::int64_t product = std::int64_t{in.values[i]} * factors[i % channels];
        // add half, floor, then pull exact ties back to even
        const std::int64_t biased = product + 128;
        std::int64_t q = biased >> 8;
        if ((biased & 255) == 0 && (q & 1)) --q;
        out.values[i] = static_cast<std::int16_t>(std::clamp<std::int64_t>(q, -32768, 32767));
    }
    const std::uint64_t words = lane_words(in.shape);
    clk.tmp(2 * words * cfg.tmp_rw_cycles_per_word);
    clk.post(words);
    return out;
}

SparseEncoding qtn_unit(const golden::PartialSumTensor& in, std::span<const QuantThreshold> thr,
                        const AccelConfig& cfg, Clock& clk) {
    SparseEncoding out;
    out.shape = in.shape;
    out.order = TraversalOrder::ChannelGroupMajor;
    out.map_bits = BitVector(in.shape.elements());
    const std::size_t positions = in.shape.positions();
    const int channels = in.shape.channels;
    std::size_t bit = 0;
    for (int g = 0; g < channel_groups(channels); ++g) {
        const int width = std::min(kChannelGroup, channels - g * kChannelGroup);
        for (std::size_t p = 0; p < positions; ++p)
            for (int i = 0; i < width; ++i, ++bit) {
                const int c = g * kChannelGroup + i;
                const std::int16_t v = in.values[p * channels + c];
                if (v > thr[c].pos) {
                    out.map_bits.set(bit, true);
                    out.value_bits.push_back(true);
                } else if (v < thr[c].neg) {
                    out.map_bits.set(bit, true);
                    out.value_bits.push_back(false);
                }
            }
    }
    const std::uint64_t words = lane_words(in.shape);
    clk.tmp(words * cfg.tmp_rw_cycles_per_word);
    clk.qnt(words);
    if (cfg.dense_value_stream) {
        clk.qnt(in.shape.elements() * cfg.fetch_cycles_per_value_bit);
    } else {
        clk.qnt(words * cfg.fetch_cycles_per_map_word);
        clk.qnt(out.value_bits.size() * cfg.fetch_cycles_per_value_bit);
    }
    return out;
}

} // namespace

NetworkResult simulate_network(const NetworkConfig& net, const TernaryTensor& x, const AccelConfig& cfg,
                               EventLog log) {
    cfg.validate();
    net.validate(true);
    require(x.shape() == net.input_shape(), ErrorKind::Config, "input shape does not match the network");

    NetworkResult result;
    result.report.config = cfg;
    SparseEncoding ternary = encode_sparse(x);
    golden::PartialSumTensor psum;
    std::uint64_t now = 0;

    for (const LayerSpec& layer : net.layers) {
        if (log) *log.out << now << " FSM layer " << layer.name << ' ' << to_string(layer.kind) << '\n';
        LayerTrace trace;
        switch (layer.kind) {
        case LayerKind::Conv3x3:
        case LayerKind::FullyConnected: {
            LayerResult r = layer.kind == LayerKind::Conv3x3 ? simulate_conv_layer(ternary, *layer.weights, cfg, log, now)
                                                              : simulate_fc_layer(ternary, *layer.weights, cfg, log, now);
            psum = std::move(r.output);
            trace = std::move(r.trace);
            break;
        }
        case LayerKind::PoolRelu:
        case LayerKind::BatchNorm:
        case LayerKind::Quantize: {
            trace.kind = layer.kind;
            Clock clk(trace, now, log);
            if (layer.kind == LayerKind::PoolRelu)
                psum = plr_unit(psum, cfg, clk);
            else if (layer.kind == LayerKind::BatchNorm)
                psum = bnm_unit(psum, layer.bn_factors, cfg, clk);
            else
                ternary = qtn_unit(psum, layer.thresholds, cfg, clk);
            clk.finish();
            break;
        }
        }
        trace.name = layer.name;
        now += trace.total_cycles;
        result.report.layers.push_back(std::move(trace));
    }
    result.logits.assign(psum.values.begin(), psum.values.end());
    result.label = golden::argmax(result.logits);
    result.report.label = result.label;
    result.report.logits = result.logits;
    return result;
}

} // namespace tbn::accel
