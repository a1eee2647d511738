// tbn: encode CIFAR-10 frames, generate fixture weights, run golden inference,
// simulate the accelerator and summarise the results.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "output.hpp"
#include "tbn/accel.hpp"
#include "tbn/cifar.hpp"
#include "tbn/dvs.hpp"
#include "tbn/error.hpp"
#include "tbn/fixtures.hpp"
#include "tbn/golden.hpp"
#include "tbn/kernels.hpp"
#include "tbn/metrics.hpp"
#include "tbn/network.hpp"
#include "tbn/parallel.hpp"
#include "tbn/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace tbn;
using cli::Fields;
using cli::Table;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "table";
    bool verbose = false;
    unsigned jobs = 0;

    cli::Format fmt() const { return format == "kv" ? cli::Format::Kv : cli::Format::Table; }
    fs::path out(const std::string& explicit_path, const char* fallback) const {
        return explicit_path.empty() ? fs::path(out_dir) / fallback : fs::path(explicit_path);
    }
};

void log(const Globals& g, const std::string& msg) {
    if (g.verbose) fmt::print(stderr, "[tbn] {}\n", msg);
}

void write_text(const fs::path& path, const std::string& text) {
    io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
    const auto bytes = io::read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<io::ArchiveEntry> load_inputs(const std::string& path, const NetworkConfig& net, int limit) {
    auto entries = io::load_archive(path);
    if (limit >= 0 && static_cast<std::size_t>(limit) < entries.size()) entries.resize(static_cast<std::size_t>(limit));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Shape s = entries[i].tensor.shape;
        const Shape want = net.input_shape();
        require(s == want, ErrorKind::Format,
                fmt::format("{}: entry {} has shape {}x{}x{}, network expects {}x{}x{}", path, i, s.height, s.width,
                            s.channels, want.height, want.width, want.channels));
    }
    return entries;
}

// ---------------------------------------------------------------- encode

struct EncodeOpts {
    std::string cifar;
    int dvs_config = 5;
    std::optional<double> threshold;
    std::optional<double> target_density;
    std::string out;
};

void cmd_encode(const Globals& g, const EncodeOpts& o) {
    const auto bytes = io::read_file(o.cifar);
    const auto records = cifar::parse(bytes);
    if (records.empty()) fmt::print(stderr, "warning: {} holds no records; writing an empty archive\n", o.cifar);

    dvs::DvsConfig cfg = dvs::config_by_id(o.dvs_config);
    std::vector<dvs::GrayFrame> frames(records.size());
    parallel_for(records.size(), g.jobs, [&](std::size_t i) { frames[i] = records[i].gray(); });
    if (o.threshold) {
        cfg.pos_threshold = *o.threshold;
        cfg.neg_threshold = -*o.threshold;
    } else if (o.target_density && !frames.empty()) {
        const auto t = dvs::calibrate_thresholds(frames, cfg, *o.target_density);
        cfg.pos_threshold = t.pos;
        cfg.neg_threshold = t.neg;
    }
    cfg.validate();

    std::vector<io::ArchiveEntry> entries(records.size());
    parallel_for(records.size(), g.jobs, [&](std::size_t i) {
        entries[i].tensor = encode_sparse(dvs::encode_frame(frames[i], cfg));
        entries[i].label = records[i].label;
    });
    const fs::path out = g.out(o.out, "encoded.tbna");
    io::save_archive(out, entries);

    Fields f("encode");
    f.add("records", entries.size());
    f.add("dvs_config", cfg.id);
    f.add("threshold_pos", cfg.pos_threshold);
    f.add("threshold_neg", cfg.neg_threshold);
    SizeStats total;
    double dmin = 1.0, dmax = 0.0;
    for (const auto& e : entries) {
        total += size_report(e.tensor);
        dmin = std::min(dmin, e.tensor.density());
        dmax = std::max(dmax, e.tensor.density());
    }
    if (!entries.empty()) {
        f.add("density_mean", fmt::format("{:.4f}", static_cast<double>(total.nonzeros) / total.elements));
        f.add("density_min", fmt::format("{:.4f}", dmin));
        f.add("density_max", fmt::format("{:.4f}", dmax));
        f.add("encoded_vs_2bit", cli::pct(total.reduction_encoded_vs_2bit()));
        f.add("encoded_vs_8bit", cli::pct(total.reduction_encoded_vs_8bit()));
    }
    f.add("archive", out.string());
    f.print(stdout, g.fmt());
}

// ---------------------------------------------------------------- genweights

struct GenOpts {
    std::string net;
    std::string probe;
    int probe_count = 8;
    double target_density = fixtures::kDefaultDensity;
};

void cmd_genweights(const Globals& g, const GenOpts& o) {
    NetworkConfig net = o.net.empty() ? default_topology() : load_network(o.net, false);
    for (auto& l : net.layers) {
        if (l.consumes_ternary() && l.weight_ref.empty()) l.weight_ref = l.name + ".tbnw";
        if (l.kind == LayerKind::BatchNorm && l.bn_ref.empty()) l.bn_ref = l.name + ".tbnp";
        if (l.kind == LayerKind::Quantize && l.threshold_ref.empty()) l.threshold_ref = l.name + ".tbnp";
    }

    std::vector<TernaryTensor> probe;
    if (!o.probe.empty()) {
        for (const auto& e : load_inputs(o.probe, net, o.probe_count)) probe.push_back(decode_sparse(e.tensor));
        require(!probe.empty(), ErrorKind::Config, "probe archive is empty");
    } else {
        probe = fixtures::synthetic_inputs(net.input_shape(), o.probe_count, o.target_density, g.seed + 1);
    }
    log(g, fmt::format("calibrating on {} probe inputs", probe.size()));
    fixtures::generate_params(net, probe, g.seed, o.target_density);

    const fs::path dir(g.out_dir);
    write_text(dir / "net.cfg", format_network(net));
    save_params(net, dir);

    const auto dens = fixtures::quantize_densities(net, probe);
    Table t("genweights.layers", {"layer", "pos", "neg", "probe_density"});
    std::size_t q = 0;
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Quantize) {
            t.row({l.name, std::to_string(l.thresholds[0].pos), std::to_string(l.thresholds[0].neg),
                   fmt::format("{:.4f}", dens[q++])});
        }
    Fields f("genweights");
    f.add("config", (dir / "net.cfg").string());
    f.add("seed", g.seed);
    f.add("memory_kib", fmt::format("{:.1f}", memory_budget(net).total_kib()));
    f.print(stdout, g.fmt());
    if (!t.empty()) t.print(stdout, g.fmt());
}

// ---------------------------------------------------------------- infer

struct InferOpts {
    std::string net;
    std::string input;
    std::string out;
    std::string dump;
    int limit = -1;
};

std::string join_logits(const std::vector<std::int32_t>& v) {
    return fmt::format("{}", fmt::join(v, " "));
}

void cmd_infer(const Globals& g, const InferOpts& o) {
    const NetworkConfig net = load_network(o.net);
    const auto entries = load_inputs(o.input, net, o.limit);
    const bool dump = !o.dump.empty();

    std::vector<golden::InferenceResult> res(entries.size());
    parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
        res[i] = golden::infer(net, decode_sparse(entries[i].tensor), dump);
    });

    std::string text = "# index label true_label logits...\n";
    std::size_t labelled = 0, correct = 0, saturations = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& truth = entries[i].label;
        text += fmt::format("{} {} {} {}\n", i, res[i].label, truth ? std::to_string(*truth) : "-",
                            join_logits(res[i].logits));
        if (truth) {
            ++labelled;
            correct += (*truth == res[i].label);
        }
        saturations += res[i].bn_saturations;
        if (dump)
            for (const auto& [idx, t] : res[i].layer_inputs)
                io::save_tensor(fs::path(o.dump) / fmt::format("img{:04}", i) /
                                    fmt::format("L{:02}_{}.tbnt", idx, net.layers[idx].name),
                                encode_sparse(t));
    }
    const fs::path out = g.out(o.out, "labels.txt");
    write_text(out, text);

    Fields f("infer");
    f.add("images", res.size());
    if (labelled > 0) f.add("top1_accuracy", cli::pct(static_cast<double>(correct) / labelled));
    f.add("bn_saturations", saturations);
    f.add("labels", out.string());
    if (dump) f.add("activations", o.dump);
    f.print(stdout, g.fmt());
}

// ---------------------------------------------------------------- simulate

struct SimOpts {
    std::string net;
    std::string input;
    std::string report_dir;
    std::string baseline;
    std::string pe_sweep;
    std::string event_log;
    int limit = -1;
    accel::AccelConfig cfg;
    bool no_zero_skip = false;
    bool no_reorder = false;
};

std::pair<int, int> parse_range(const std::string& s) {
    static const std::regex re(R"(\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*)");
    std::smatch m;
    require(std::regex_match(s, m, re), ErrorKind::Config, "expected N or A..B, got '" + s + "'");
    const int a = std::stoi(m[1]);
    const int b = m[2].matched ? std::stoi(m[2]) : a;
    require(a >= 1 && a <= b, ErrorKind::Config, "bad range '" + s + "'");
    return {a, b};
}

void cmd_simulate(const Globals& g, SimOpts o) {
    require(o.baseline.empty() || o.baseline == "bnn", ErrorKind::Config, "--baseline accepts only 'bnn'");
    o.cfg.zero_skip_enabled = !o.no_zero_skip;
    o.cfg.reorder_enabled = !o.no_reorder;
    o.cfg.validate();
    const NetworkConfig net = load_network(o.net);
    const auto entries = load_inputs(o.input, net, o.limit);
    const bool with_bnn = o.baseline == "bnn";
    const bool with_log = !o.event_log.empty();
    const fs::path report_dir = g.out(o.report_dir, "sim");

    struct Item {
        golden::InferenceResult golden;
        accel::NetworkResult tbn, bnn;
        std::string events;
        bool agree = true;
    };
    std::vector<Item> items(entries.size());
    const auto bnn_cfg = accel::AccelConfig::bnn_baseline(o.cfg);
    parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
        Item& it = items[i];
        const TernaryTensor x = decode_sparse(entries[i].tensor);
        it.golden = golden::infer(net, x);
        std::ostringstream events;
        it.tbn = accel::simulate_network(net, x, o.cfg, with_log ? accel::EventLog{&events} : accel::EventLog{});
        it.tbn.report.golden_label = it.golden.label;
        it.agree = it.tbn.logits == it.golden.logits && it.tbn.label == it.golden.label;
        if (with_bnn) {
            it.bnn = accel::simulate_network(net, x, bnn_cfg);
            it.bnn.report.golden_label = it.golden.label;
            it.agree = it.agree && it.bnn.logits == it.golden.logits;
        }
        it.events = events.str();
    });

    std::ofstream events;
    if (with_log) {
        if (fs::path(o.event_log).has_parent_path()) fs::create_directories(fs::path(o.event_log).parent_path());
        events.open(o.event_log, std::ios::trunc);
        require(static_cast<bool>(events), ErrorKind::Format, "cannot write " + o.event_log);
    }
    fs::create_directories(report_dir);
    Table per("simulate.images", with_bnn ? std::vector<std::string>{"image", "label", "golden", "cycles", "bnn_cycles", "agree"}
                                          : std::vector<std::string>{"image", "label", "golden", "cycles", "agree"});
    std::uint64_t cycles = 0, bnn_cycles = 0;
    std::vector<std::size_t> mismatches;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Item& it = items[i];
        write_text(report_dir / fmt::format("img{:04}.report", i), accel::format_report(it.tbn.report));
        if (with_bnn) write_text(report_dir / "bnn" / fmt::format("img{:04}.report", i), accel::format_report(it.bnn.report));
        if (with_log) events << "# image " << i << "\n" << it.events;
        cycles += it.tbn.report.total_cycles();
        bnn_cycles += it.bnn.report.total_cycles();
        if (!it.agree) mismatches.push_back(i);
        std::vector<std::string> row{std::to_string(i), std::to_string(it.tbn.label), std::to_string(it.golden.label),
                                     std::to_string(it.tbn.report.total_cycles())};
        if (with_bnn) row.push_back(std::to_string(it.bnn.report.total_cycles()));
        row.push_back(it.agree ? "yes" : "NO");
        per.row(std::move(row));
    }

    const double n = static_cast<double>(items.size());
    Fields f("simulate");
    f.add("images", items.size());
    f.add("kernels", kernels::active().name);
    f.add("mismatches", mismatches.size());
    if (!items.empty()) {
        f.add("mean_cycles", fmt::format("{:.1f}", cycles / n));
        f.add("mean_time_s", fmt::format("{:.6f}", cycles / n / o.cfg.clock_hz));
        f.add("published_time_s", metrics::kPublishedTimeS);
        if (with_bnn) {
            f.add("bnn_mean_cycles", fmt::format("{:.1f}", bnn_cycles / n));
            f.add("cycle_reduction", cli::pct(1.0 - static_cast<double>(cycles) / static_cast<double>(bnn_cycles)));
        }
    }
    f.add("reports", report_dir.string());
    if (g.verbose || items.size() <= 32) per.print(stdout, g.fmt());
    f.print(stdout, g.fmt());

    if (!o.pe_sweep.empty()) {
        const auto [lo, hi] = parse_range(o.pe_sweep);
        Table t("simulate.pe_sweep", {"pe_per_pcl", "no_skip", "skip", "skip_reorder", "speedup_skip", "speedup_reorder"});
        for (int pe = lo; pe <= hi; ++pe) {
            accel::AccelConfig base = o.cfg;
            base.pe_per_pcl = pe;
            accel::AccelConfig noskip = base, skip = base, both = base;
            noskip.zero_skip_enabled = false;
            noskip.reorder_enabled = false;
            skip.zero_skip_enabled = true;
            skip.reorder_enabled = false;
            both.zero_skip_enabled = true;
            both.reorder_enabled = true;
            std::vector<std::array<std::uint64_t, 3>> c(entries.size());
            parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
                const TernaryTensor x = decode_sparse(entries[i].tensor);
                c[i] = {accel::simulate_network(net, x, noskip).report.total_cycles(),
                        accel::simulate_network(net, x, skip).report.total_cycles(),
                        accel::simulate_network(net, x, both).report.total_cycles()};
            });
            std::array<std::uint64_t, 3> sum{};
            for (const auto& r : c)
                for (int k = 0; k < 3; ++k) sum[k] += r[k];
            auto speedup = [](std::uint64_t a, std::uint64_t b) {
                return b == 0 ? std::string("-") : fmt::format("{:.3f}", static_cast<double>(a) / static_cast<double>(b));
            };
            t.row({std::to_string(pe), std::to_string(sum[0]), std::to_string(sum[1]), std::to_string(sum[2]),
                   speedup(sum[0], sum[1]), speedup(sum[0], sum[2])});
        }
        t.print(stdout, g.fmt());
    }

    if (!mismatches.empty())
        fail(ErrorKind::Mismatch, fmt::format("simulator disagrees with the golden model on {} image(s), first {}",
                                              mismatches.size(), mismatches.front()));
}

// ---------------------------------------------------------------- report

struct ReportOpts {
    std::string activations;
    std::string net;
    std::vector<std::string> sim_reports;
    std::optional<double> accuracy;
    std::optional<double> time_s;
    std::optional<double> power_mw;
    std::string power_model;
    double clock_hz = 10e6;
    bool extrapolate = false;
};

std::vector<fs::path> sorted_files(const fs::path& root, const std::string& ext, bool recursive) {
    std::vector<fs::path> out;
    require(fs::exists(root), ErrorKind::Config, "not found: " + root.string());
    if (fs::is_regular_file(root)) return {root};
    if (recursive) {
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    } else {
        for (const auto& e : fs::directory_iterator(root))
            if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void cmd_report(const Globals& g, const ReportOpts& o) {
    require(!o.activations.empty() || !o.sim_reports.empty() || o.accuracy, ErrorKind::Config,
            "report: nothing to report; give --activations, --sim-report or --accuracy");
    const cli::Format out = g.fmt();

    if (!o.activations.empty()) {
        // Files are named L<layer index>_<layer name>.tbnt; group identical names across images.
        static const std::regex name_re(R"(L(\d+)_(.+))");
        std::map<std::string, SizeStats> sizes;
        std::vector<std::string> order;
        std::vector<std::pair<std::size_t, SparseEncoding>> by_index;
        SizeStats total;
        for (const auto& p : sorted_files(o.activations, ".tbnt", true)) {
            const SparseEncoding enc = io::load_tensor(p);
            const std::string stem = p.stem().string();
            if (!sizes.count(stem)) order.push_back(stem);
            const SizeStats s = size_report(enc);
            sizes[stem] += s;
            total += s;
            std::smatch m;
            if (std::regex_match(stem, m, name_re)) by_index.emplace_back(std::stoul(m[1]), enc);
        }
        require(!order.empty(), ErrorKind::Config, "no .tbnt files under " + o.activations);
        std::sort(order.begin(), order.end());
        Table t("data_size", {"layer", "elements", "density", "bits_8b", "bits_2b", "bits_encoded", "2b_vs_8b",
                              "enc_vs_2b", "enc_vs_8b"});
        auto row = [&](const std::string& name, const SizeStats& s) {
            t.row({name, std::to_string(s.elements), fmt::format("{:.4f}", static_cast<double>(s.nonzeros) / s.elements),
                   std::to_string(s.dense8_bits), std::to_string(s.dense2_bits), std::to_string(s.encoded_bits),
                   cli::pct(s.reduction_2bit_vs_8bit()), cli::pct(s.reduction_encoded_vs_2bit()),
                   cli::pct(s.reduction_encoded_vs_8bit())});
        };
        for (const auto& name : order) row(name, sizes.at(name));
        row("total", total);
        t.print(stdout, out);

        if (!o.net.empty()) {
            const NetworkConfig net = load_network(o.net, false);
            const auto st = metrics::mac_report(net, by_index);
            std::map<std::string, metrics::MacLayer> agg;
            std::vector<std::string> names;
            for (const auto& l : st.layers) {
                if (!agg.count(l.name)) names.push_back(l.name);
                agg[l.name].dense_macs += l.dense_macs;
                agg[l.name].executed_macs += l.executed_macs;
            }
            Table m("macs", {"layer", "dense", "bnn", "tbn_executed", "reduction"});
            for (const auto& name : names) {
                const auto& l = agg.at(name);
                m.row({name, std::to_string(l.dense_macs), std::to_string(l.dense_macs), std::to_string(l.executed_macs),
                       cli::pct(l.dense_macs ? 1.0 - static_cast<double>(l.executed_macs) / l.dense_macs : 0.0)});
            }
            m.row({"total", std::to_string(st.dense_macs), std::to_string(st.bnn_macs), std::to_string(st.tbn_executed),
                   cli::pct(st.reduction())});
            m.print(stdout, out);
        }
    }

    std::vector<accel::SimReport> reports;
    for (const auto& root : o.sim_reports)
        for (const auto& p : sorted_files(root, ".report", false)) reports.push_back(accel::parse_report(read_text(p)));
    if (!o.sim_reports.empty()) require(!reports.empty(), ErrorKind::Config, "no .report files found");

    double clock_hz = o.clock_hz;
    std::optional<double> time_s = o.time_s;
    if (!reports.empty()) {
        clock_hz = reports.front().config.clock_hz;
        for (const auto& r : reports)
            require(r.config.clock_hz == clock_hz && r.layers.size() == reports.front().layers.size(), ErrorKind::Config,
                    "sim reports disagree on clock or layer count");

        std::vector<accel::LayerTrace> per(reports.front().layers.size());
        accel::LayerTrace total;
        double wall = 0.0;
        for (const auto& r : reports) {
            for (std::size_t i = 0; i < per.size(); ++i) {
                const auto& l = r.layers[i];
                per[i].name = l.name;
                per[i].total_cycles += l.total_cycles;
                per[i].fetch_cycles += l.fetch_cycles;
                per[i].mac_cycles += l.mac_cycles;
                per[i].sort_cycles += l.sort_cycles;
                per[i].tmp_cycles += l.tmp_cycles;
                per[i].post_cycles += l.post_cycles;
                per[i].qnt_cycles += l.qnt_cycles;
                per[i].dense_macs += l.dense_macs;
                per[i].executed_macs += l.executed_macs;
            }
            wall += r.wall_time_s();
        }
        Table c("cycles", {"layer", "total", "fetch", "mac", "sort", "tmp", "post", "qnt"});
        for (const auto& l : per) {
            c.row({l.name, std::to_string(l.total_cycles), std::to_string(l.fetch_cycles), std::to_string(l.mac_cycles),
                   std::to_string(l.sort_cycles), std::to_string(l.tmp_cycles), std::to_string(l.post_cycles),
                   std::to_string(l.qnt_cycles)});
            total.total_cycles += l.total_cycles;
            total.fetch_cycles += l.fetch_cycles;
            total.mac_cycles += l.mac_cycles;
            total.sort_cycles += l.sort_cycles;
            total.tmp_cycles += l.tmp_cycles;
            total.post_cycles += l.post_cycles;
            total.qnt_cycles += l.qnt_cycles;
            total.dense_macs += l.dense_macs;
            total.executed_macs += l.executed_macs;
        }
        c.row({"total", std::to_string(total.total_cycles), std::to_string(total.fetch_cycles),
               std::to_string(total.mac_cycles), std::to_string(total.sort_cycles), std::to_string(total.tmp_cycles),
               std::to_string(total.post_cycles), std::to_string(total.qnt_cycles)});
        const double tc = static_cast<double>(std::max<std::uint64_t>(1, total.total_cycles));
        c.row({"share", "100.00%", cli::pct(total.fetch_cycles / tc), cli::pct(total.mac_cycles / tc),
               cli::pct(total.sort_cycles / tc), cli::pct(total.tmp_cycles / tc), cli::pct(total.post_cycles / tc),
               cli::pct(total.qnt_cycles / tc)});
        c.print(stdout, out);

        Fields t("throughput");
        t.add("images", reports.size());
        t.add("clock_hz", clock_hz);
        t.add("mean_time_s", fmt::format("{:.6f}", wall / reports.size()));
        t.add("gops_dense_equivalent", fmt::format("{:.6f}", 2.0 * total.dense_macs / wall / 1e9));
        t.add("gops_executed", fmt::format("{:.6f}", 2.0 * total.executed_macs / wall / 1e9));
        t.add("gops_published", metrics::kPublishedGops);
        t.add("time_published_s", metrics::kPublishedTimeS);
        t.note("GOPS count 2 ops per MAC; the published figure does not state its convention");
        t.print(stdout, out);
        if (!time_s) time_s = wall / reports.size();
    }

    if (!time_s) return;
    double power = 0.0;
    if (o.power_mw) {
        power = *o.power_mw;
    } else {
        const auto model = o.power_model.empty() ? metrics::PowerModel::defaults()
                                                 : metrics::PowerModel::parse(read_text(o.power_model));
        power = model.power_mw(clock_hz, o.extrapolate);
    }
    const double energy = metrics::energy_mj(power, *time_s);
    Fields e("energy");
    e.add("time_s", fmt::format("{:.6f}", *time_s));
    e.add("power_mw", fmt::format("{:.4f}", power));
    e.add("energy_mj", fmt::format("{:.6f}", energy));
    if (o.accuracy) {
        const double f = metrics::fom({*o.accuracy, *time_s, energy});
        e.add("accuracy_pct", *o.accuracy);
        e.add("fom", fmt::format("{:.1f}", f));
        e.add("fom_published", fmt::format("{:.1f}", metrics::kPublishedFom));
        e.note("fom is in %/s/mJ; the published figure was computed from unrounded time and energy, so values "
               "recomputed from the rounded 0.44 s / 0.704 mJ differ by a few percent");
    }
    e.print(stdout, out);
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Format: return 2;
    case ErrorKind::Mismatch: return 3;
    case ErrorKind::Config: return 4;
    default: return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ternary-input binary-weight CNN tools: DVS encoding, inference and accelerator simulation"};
    app.require_subcommand(1);
    app.set_config("--manifest", "", "Key/value defaults file (TOML/INI; [subcommand] sections)");
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for default outputs")->capture_default_str();
    app.add_option("--format", g.format, "Output style")->check(CLI::IsMember({"table", "kv"}))->capture_default_str();
    app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");
    app.add_option("-j,--jobs", g.jobs, "Worker threads (0 = all cores)")->capture_default_str();

    EncodeOpts enc;
    auto* c_enc = app.add_subcommand("encode", "CIFAR-10 binary batch -> spatial-DVS ternary archive");
    c_enc->add_option("--cifar", enc.cifar, "CIFAR-10 binary file")->required();
    c_enc->add_option("--dvs-config", enc.dvs_config, "DVS configuration 1..5")->check(CLI::Range(1, 5))->capture_default_str();
    auto* thr = c_enc->add_option("--threshold", enc.threshold, "Symmetric threshold (intensity units)");
    c_enc->add_option("--target-density", enc.target_density, "Calibrate thresholds to this density")->excludes(thr);
    c_enc->add_option("-o,--out", enc.out, "Archive path (default <out-dir>/encoded.tbna)");

    GenOpts gen;
    auto* c_gen = app.add_subcommand("genweights", "Random weights and calibrated thresholds for a network");
    c_gen->add_option("--net", gen.net, "Network config (default topology when absent)");
    c_gen->add_option("--probe", gen.probe, "Archive whose first inputs form the probe batch");
    c_gen->add_option("--probe-count", gen.probe_count, "Probe inputs")->check(CLI::PositiveNumber)->capture_default_str();
    c_gen->add_option("--target-density", gen.target_density, "Quantize output density")->check(CLI::Range(0.0, 1.0))->capture_default_str();

    InferOpts inf;
    auto* c_inf = app.add_subcommand("infer", "Golden-model inference over an archive");
    c_inf->add_option("--net", inf.net, "Network config")->required();
    c_inf->add_option("-i,--input", inf.input, "Input archive")->required();
    c_inf->add_option("-o,--out", inf.out, "Labels file (default <out-dir>/labels.txt)");
    c_inf->add_option("--dump-activations", inf.dump, "Directory for per-layer ternary inputs");
    c_inf->add_option("--limit", inf.limit, "Process only the first N entries");

    SimOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "Cycle-level accelerator simulation, checked against the golden model");
    c_sim->add_option("--net", sim.net, "Network config")->required();
    c_sim->add_option("-i,--input", sim.input, "Input archive")->required();
    c_sim->add_option("--report-dir", sim.report_dir, "Report directory (default <out-dir>/sim)");
    c_sim->add_option("--baseline", sim.baseline, "Also run a baseline mode")->check(CLI::IsMember({"bnn"}));
    c_sim->add_option("--pe-sweep", sim.pe_sweep, "PE-per-cluster range, e.g. 1..6");
    c_sim->add_option("--event-log", sim.event_log, "Write the per-unit event log here");
    c_sim->add_option("--limit", sim.limit, "Process only the first N entries");
    c_sim->add_option("--pcl-count", sim.cfg.pcl_count)->capture_default_str();
    c_sim->add_option("--pe-per-pcl", sim.cfg.pe_per_pcl)->capture_default_str();
    c_sim->add_option("--clock-hz", sim.cfg.clock_hz)->capture_default_str();
    c_sim->add_option("--fetch-map-cycles", sim.cfg.fetch_cycles_per_map_word)->capture_default_str();
    c_sim->add_option("--fetch-value-cycles", sim.cfg.fetch_cycles_per_value_bit)->capture_default_str();
    c_sim->add_option("--fetch-weight-cycles", sim.cfg.fetch_cycles_per_weight_word)->capture_default_str();
    c_sim->add_option("--tmp-cycles", sim.cfg.tmp_rw_cycles_per_word)->capture_default_str();
    c_sim->add_flag("--no-zero-skip", sim.no_zero_skip);
    c_sim->add_flag("--no-reorder", sim.no_reorder);

    ReportOpts rep;
    auto* c_rep = app.add_subcommand("report", "Data size, MAC, cycle, throughput, energy and FoM summary");
    c_rep->add_option("--activations", rep.activations, "Directory written by infer --dump-activations");
    c_rep->add_option("--net", rep.net, "Network config (enables the MAC table)");
    c_rep->add_option("--sim-report", rep.sim_reports, "Report files or directories")->expected(1, -1);
    c_rep->add_option("--accuracy", rep.accuracy, "Top-1 accuracy in percent");
    c_rep->add_option("--time", rep.time_s, "Processing time per image in seconds");
    c_rep->add_option("--power-mw", rep.power_mw, "Power in mW");
    c_rep->add_option("--power-model", rep.power_model, "Power table file, 'clock_hz milliwatts' per line");
    c_rep->add_option("--clock-hz", rep.clock_hz, "Clock when no sim report is given")->capture_default_str();
    c_rep->add_flag("--extrapolate", rep.extrapolate, "Allow clocks outside the power table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (*c_enc) cmd_encode(g, enc);
        if (*c_gen) cmd_genweights(g, gen);
        if (*c_inf) cmd_infer(g, inf);
        if (*c_sim) cmd_simulate(g, sim);
        if (*c_rep) cmd_report(g, rep);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
