#include <map>
#include <sstream>

#include "tbn/accel.hpp"
#include "tbn/error.hpp"

namespace tbn::accel {

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    return out.str();
}

template <typename T>
std::vector<T> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<T> out;
    T v;
    while (in >> v) out.push_back(v);
    return out;
}

void emit_trace(std::ostream& out, const std::string& prefix, const LayerTrace& l) {
    out << prefix << "name = " << l.name << "\n";
    out << prefix << "kind = " << to_string(l.kind) << "\n";
    out << prefix << "total_cycles = " << l.total_cycles << "\n";
    out << prefix << "fetch_cycles = " << l.fetch_cycles << "\n";
    out << prefix << "mac_cycles = " << l.mac_cycles << "\n";
    out << prefix << "sort_cycles = " << l.sort_cycles << "\n";
    out << prefix << "tmp_cycles = " << l.tmp_cycles << "\n";
    out << prefix << "post_cycles = " << l.post_cycles << "\n";
    out << prefix << "qnt_cycles = " << l.qnt_cycles << "\n";
    out << prefix << "pe_busy_cycles = " << join(l.pe_busy_cycles) << "\n";
    out << prefix << "executed_macs = " << l.executed_macs << "\n";
    out << prefix << "skipped_macs = " << l.skipped_macs << "\n";
    out << prefix << "dense_macs = " << l.dense_macs << "\n";
    out << prefix << "input_density = " << l.input_density << "\n";
}

} // namespace

std::string format_report(const SimReport& r) {
    std::ostringstream out;
    out.precision(10);
    const AccelConfig& c = r.config;
    out << "tbn_sim_report = 1\n";
    out << "config.pcl_count = " << c.pcl_count << "\n";
    out << "config.pe_per_pcl = " << c.pe_per_pcl << "\n";
    out << "config.xor_lanes_per_pe = " << c.xor_lanes_per_pe << "\n";
    out << "config.clock_hz = " << c.clock_hz << "\n";
    out << "config.fetch_cycles_per_map_word = " << c.fetch_cycles_per_map_word << "\n";
    out << "config.fetch_cycles_per_value_bit = " << c.fetch_cycles_per_value_bit << "\n";
    out << "config.fetch_cycles_per_weight_word = " << c.fetch_cycles_per_weight_word << "\n";
    out << "config.tmp_rw_cycles_per_word = " << c.tmp_rw_cycles_per_word << "\n";
    out << "config.zero_skip_enabled = " << c.zero_skip_enabled << "\n";
    out << "config.reorder_enabled = " << c.reorder_enabled << "\n";
    out << "config.dense_value_stream = " << c.dense_value_stream << "\n";
    out << "label = " << r.label << "\n";
    out << "golden_label = " << r.golden_label << "\n";
    out << "logits = " << join(r.logits) << "\n";
    out << "layer_count = " << r.layers.size() << "\n";
    for (std::size_t i = 0; i < r.layers.size(); ++i) emit_trace(out, "layer." + std::to_string(i) + ".", r.layers[i]);
    emit_trace(out, "total.", r.totals());
    out << "total.wall_time_s = " << r.wall_time_s() << "\n";
    return out.str();
}

SimReport parse_report(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (line.empty() || line[0] == '#') continue;
        require(eq != std::string::npos, ErrorKind::Format, "sim report: malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    require(kv.count("tbn_sim_report") && kv["tbn_sim_report"] == "1", ErrorKind::Format,
            "sim report: missing or unsupported version header");
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        require(it != kv.end(), ErrorKind::Format, "sim report: missing key " + k);
        return it->second;
    };
    auto u64 = [&](const std::string& k) { return std::stoull(get(k)); };
    auto i32 = [&](const std::string& k) { return std::stoi(get(k)); };

    SimReport r;
    AccelConfig& c = r.config;
    c.pcl_count = i32("config.pcl_count");
    c.pe_per_pcl = i32("config.pe_per_pcl");
    c.xor_lanes_per_pe = i32("config.xor_lanes_per_pe");
    c.clock_hz = std::stod(get("config.clock_hz"));
    c.fetch_cycles_per_map_word = i32("config.fetch_cycles_per_map_word");
    c.fetch_cycles_per_value_bit = i32("config.fetch_cycles_per_value_bit");
    c.fetch_cycles_per_weight_word = i32("config.fetch_cycles_per_weight_word");
    c.tmp_rw_cycles_per_word = i32("config.tmp_rw_cycles_per_word");
    c.zero_skip_enabled = i32("config.zero_skip_enabled") != 0;
    c.reorder_enabled = i32("config.reorder_enabled") != 0;
    c.dense_value_stream = i32("config.dense_value_stream") != 0;
    r.label = i32("label");
    r.golden_label = i32("golden_label");
    r.logits = split<std::int32_t>(get("logits"));
    const auto count = u64("layer_count");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string p = "layer." + std::to_string(i) + ".";
        LayerTrace l;
        l.name = kv.count(p + "name") ? kv[p + "name"] : "";
        l.kind = parse_layer_kind(get(p + "kind"));
        l.total_cycles = u64(p + "total_cycles");
        l.fetch_cycles = u64(p + "fetch_cycles");
        l.mac_cycles = u64(p + "mac_cycles");
        l.sort_cycles = u64(p + "sort_cycles");
        l.tmp_cycles = u64(p + "tmp_cycles");
        l.post_cycles = u64(p + "post_cycles");
        l.qnt_cycles = u64(p + "qnt_cycles");
        l.pe_busy_cycles = split<std::uint64_t>(kv[p + "pe_busy_cycles"]);
        l.executed_macs = u64(p + "executed_macs");
        l.skipped_macs = u64(p + "skipped_macs");
        l.dense_macs = u64(p + "dense_macs");
        l.input_density = std::stod(get(p + "input_density"));
        r.layers.push_back(std::move(l));
    }
    return r;
}

} // namespace tbn::accel
