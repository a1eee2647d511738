#include "tbn/network.hpp"

#include <algorithm>
#include <sstream>

#include "tbn/error.hpp"
#include "tbn/tensor_io.hpp"

namespace tbn {

const char* to_string(LayerKind k) {
    switch (k) {
    case LayerKind::Conv3x3: return "conv3x3";
    case LayerKind::FullyConnected: return "fully_connected";
    case LayerKind::PoolRelu: return "pool_relu";
    case LayerKind::BatchNorm: return "batch_norm";
    case LayerKind::Quantize: return "quantize";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
    for (LayerKind k : {LayerKind::Conv3x3, LayerKind::FullyConnected, LayerKind::PoolRelu, LayerKind::BatchNorm,
                        LayerKind::Quantize})
        if (s == to_string(k)) return k;
    fail(ErrorKind::Config, "unknown layer kind '" + s + "'");
}

namespace {

std::string shape_str(const Shape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

std::string layer_label(const LayerSpec& l, std::size_t i) {
    return "layer " + std::to_string(i) + (l.name.empty() ? "" : " (" + l.name + ")");
}

} // namespace

void NetworkConfig::validate(bool require_params) const {
    require(!layers.empty(), ErrorKind::Config, "network has no layers");
    require(class_count > 0, ErrorKind::Config, "class_count must be positive");
    bool ternary = true;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        const std::string who = layer_label(l, i);
        require(l.in_shape.valid() && l.out_shape.valid(), ErrorKind::Config, who + ": non-positive shape");
        if (i > 0)
            require(layers[i - 1].out_shape == l.in_shape, ErrorKind::Config,
                    who + ": input " + shape_str(l.in_shape) + " does not chain from " +
                        shape_str(layers[i - 1].out_shape));
        require(l.consumes_ternary() == ternary, ErrorKind::Config,
                who + (ternary ? ": expects partial sums but receives ternary activations"
                               : ": expects ternary activations but receives partial sums (missing quantize?)"));
        ternary = l.produces_ternary();

        const int cin = l.in_shape.channels;
        switch (l.kind) {
        case LayerKind::Conv3x3:
            require(l.out_shape.height == l.in_shape.height && l.out_shape.width == l.in_shape.width, ErrorKind::Config,
                    who + ": conv3x3 must preserve height and width");
            if (require_params) {
                require(l.weights != nullptr, ErrorKind::Config, who + ": missing weights");
                require(l.weights->kernel_h() == 3 && l.weights->kernel_w() == 3 && l.weights->in_channels() == cin &&
                            l.weights->out_channels() == l.out_shape.channels,
                        ErrorKind::Config, who + ": weight dimensions do not match layer shape");
            }
            break;
        case LayerKind::FullyConnected:
            require(l.out_shape.height == 1 && l.out_shape.width == 1, ErrorKind::Config,
                    who + ": fully_connected output must be 1x1xN");
            if (require_params) {
                require(l.weights != nullptr, ErrorKind::Config, who + ": missing weights");
                require(l.weights->kernel_h() == 1 && l.weights->kernel_w() == 1 &&
                            static_cast<std::size_t>(l.weights->in_channels()) == l.in_shape.elements() &&
                            l.weights->out_channels() == l.out_shape.channels,
                        ErrorKind::Config, who + ": weight dimensions do not match layer shape");
            }
            break;
        case LayerKind::PoolRelu:
            require(l.in_shape.height % 2 == 0 && l.in_shape.width % 2 == 0, ErrorKind::Config,
                    who + ": pool_relu needs even height and width");
            require(l.out_shape == Shape{l.in_shape.height / 2, l.in_shape.width / 2, cin}, ErrorKind::Config,
                    who + ": pool_relu must halve height and width");
            break;
        case LayerKind::BatchNorm:
            require(l.out_shape == l.in_shape, ErrorKind::Config, who + ": batch_norm must preserve shape");
            if (require_params)
                require(l.bn_factors.size() == static_cast<std::size_t>(cin), ErrorKind::Config,
                        who + ": expected " + std::to_string(cin) + " BN factors");
            break;
        case LayerKind::Quantize:
            require(l.out_shape == l.in_shape, ErrorKind::Config, who + ": quantize must preserve shape");
            if (require_params) {
                require(l.thresholds.size() == static_cast<std::size_t>(cin), ErrorKind::Config,
                        who + ": expected " + std::to_string(cin) + " threshold pairs");
                for (const auto& t : l.thresholds)
                    require(t.neg < t.pos, ErrorKind::Config, who + ": quantize thresholds need neg < pos");
            }
            break;
        }
    }
    const LayerSpec& last = layers.back();
    require(last.kind == LayerKind::FullyConnected && last.out_shape.channels == class_count, ErrorKind::Config,
            "final layer must be fully_connected with class_count outputs");
}

NetworkConfig default_topology(int class_count) {
    NetworkConfig net;
    net.class_count = class_count;
    Shape cur{32, 32, 2};
    int conv_index = 0;
    int block_index = 0;
    auto add = [&](LayerSpec l) { net.layers.push_back(std::move(l)); };
    auto conv = [&](int cout) {
        LayerSpec l;
        l.name = "cv" + std::to_string(++conv_index);
        l.kind = LayerKind::Conv3x3;
        l.in_shape = cur;
        cur.channels = cout;
        l.out_shape = cur;
        l.weight_ref = l.name + ".tbnw";
        add(std::move(l));
    };
    auto quantize = [&](const std::string& name) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::Quantize;
        l.in_shape = l.out_shape = cur;
        l.threshold_ref = name + ".tbnp";
        add(std::move(l));
    };
    auto pool_bn_quant = [&]() {
        ++block_index;
        LayerSpec pl;
        pl.name = "pl" + std::to_string(block_index);
        pl.kind = LayerKind::PoolRelu;
        pl.in_shape = cur;
        cur = Shape{cur.height / 2, cur.width / 2, cur.channels};
        pl.out_shape = cur;
        add(std::move(pl));
        LayerSpec bn;
        bn.name = "bn" + std::to_string(block_index);
        bn.kind = LayerKind::BatchNorm;
        bn.in_shape = bn.out_shape = cur;
        bn.bn_ref = bn.name + ".tbnp";
        add(std::move(bn));
        quantize("qnt_bn" + std::to_string(block_index));
    };
    auto fc = [&](const std::string& name, int cout) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::FullyConnected;
        l.in_shape = cur;
        cur = Shape{1, 1, cout};
        l.out_shape = cur;
        l.weight_ref = name + ".tbnw";
        add(std::move(l));
    };

    conv(64);
    quantize("qnt_cv1");
    conv(64);
    pool_bn_quant();
    conv(128);
    quantize("qnt_cv3");
    conv(128);
    pool_bn_quant();
    conv(256);
    quantize("qnt_cv5");
    conv(256);
    pool_bn_quant();
    fc("fc1", 256);
    quantize("qnt_fc1");
    fc("fc2", class_count);
    return net;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Shape parse_shape(const std::string& v, int line) {
    std::istringstream in(v);
    Shape s;
    if (!(in >> s.height >> s.width >> s.channels))
        fail(ErrorKind::Config, "network config line " + std::to_string(line) + ": shape needs 'H W C'");
    return s;
}

int parse_int(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Config, "network config line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
}

} // namespace

NetworkConfig parse_network(const std::string& text) {
    NetworkConfig net;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    LayerSpec* cur = nullptr;
    bool have_kind = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line == "[layer]") {
            if (cur) require(have_kind, ErrorKind::Config, "network config: layer block without kind");
            net.layers.emplace_back();
            cur = &net.layers.back();
            have_kind = false;
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::Config,
                "network config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!cur) {
            if (key == "class_count")
                net.class_count = parse_int(value, line_no);
            else
                fail(ErrorKind::Config, "network config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        if (key == "name")
            cur->name = value;
        else if (key == "kind") {
            cur->kind = parse_layer_kind(value);
            have_kind = true;
        } else if (key == "in")
            cur->in_shape = parse_shape(value, line_no);
        else if (key == "out")
            cur->out_shape = parse_shape(value, line_no);
        else if (key == "weights")
            cur->weight_ref = value;
        else if (key == "bn_factors")
            cur->bn_ref = value;
        else if (key == "thresholds")
            cur->threshold_ref = value;
        else
            fail(ErrorKind::Config, "network config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (cur) require(have_kind, ErrorKind::Config, "network config: layer block without kind");
    net.validate(false);
    return net;
}

std::string format_network(const NetworkConfig& net) {
    std::ostringstream out;
    out << "class_count = " << net.class_count << "\n";
    for (const auto& l : net.layers) {
        out << "\n[layer]\n";
        if (!l.name.empty()) out << "name = " << l.name << "\n";
        out << "kind = " << to_string(l.kind) << "\n";
        out << "in = " << l.in_shape.height << " " << l.in_shape.width << " " << l.in_shape.channels << "\n";
        out << "out = " << l.out_shape.height << " " << l.out_shape.width << " " << l.out_shape.channels << "\n";
        if (!l.weight_ref.empty()) out << "weights = " << l.weight_ref << "\n";
        if (!l.bn_ref.empty()) out << "bn_factors = " << l.bn_ref << "\n";
        if (!l.threshold_ref.empty()) out << "thresholds = " << l.threshold_ref << "\n";
    }
    return out.str();
}

void load_params(NetworkConfig& net, const std::filesystem::path& base_dir) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        LayerSpec& l = net.layers[i];
        const std::string who = layer_label(l, i);
        auto need_ref = [&](const std::string& ref, const char* what) {
            require(!ref.empty(), ErrorKind::Config, who + ": no " + what + " file configured");
            const auto path = base_dir / ref;
            require(std::filesystem::exists(path), ErrorKind::Config,
                    who + ": " + what + " file not found: " + path.string());
            return path;
        };
        try {
            switch (l.kind) {
            case LayerKind::Conv3x3:
            case LayerKind::FullyConnected:
                l.weights = std::make_shared<BinaryWeightTensor>(io::load_weights(need_ref(l.weight_ref, "weight")));
                break;
            case LayerKind::BatchNorm:
                l.bn_factors = io::deserialize_params(io::read_file(need_ref(l.bn_ref, "BN factor")), 1);
                break;
            case LayerKind::Quantize: {
                const auto raw = io::deserialize_params(io::read_file(need_ref(l.threshold_ref, "threshold")), 2);
                l.thresholds.resize(raw.size() / 2);
                for (std::size_t c = 0; c < l.thresholds.size(); ++c)
                    l.thresholds[c] = QuantThreshold{raw[2 * c], raw[2 * c + 1]};
                break;
            }
            case LayerKind::PoolRelu: break;
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Format) fail(ErrorKind::Format, who + ": " + e.what());
            throw;
        }
    }
    net.validate(true);
}

NetworkConfig load_network(const std::filesystem::path& config_path, bool with_params) {
    const auto bytes = io::read_file(config_path);
    NetworkConfig net = parse_network(std::string(bytes.begin(), bytes.end()));
    if (with_params) load_params(net, config_path.parent_path());
    return net;
}

void save_params(const NetworkConfig& net, const std::filesystem::path& base_dir) {
    for (const auto& l : net.layers) {
        if (l.weights && !l.weight_ref.empty()) io::save_weights(base_dir / l.weight_ref, *l.weights);
        if (!l.bn_factors.empty() && !l.bn_ref.empty())
            io::write_file(base_dir / l.bn_ref,
                           io::serialize_params(l.bn_factors, static_cast<int>(l.bn_factors.size())));
        if (!l.thresholds.empty() && !l.threshold_ref.empty()) {
            std::vector<std::int16_t> raw;
            for (const auto& t : l.thresholds) {
                raw.push_back(t.pos);
                raw.push_back(t.neg);
            }
            io::write_file(base_dir / l.threshold_ref,
                           io::serialize_params(raw, static_cast<int>(l.thresholds.size())));
        }
    }
}

MemoryBudget memory_budget(const NetworkConfig& net) {
    MemoryBudget b;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        const std::uint64_t cin = l.in_shape.channels;
        const std::uint64_t cout = l.out_shape.channels;
        switch (l.kind) {
        case LayerKind::Conv3x3: {
            b.weight_bits += 9 * cin * cout;
            // One 32-lane output group is accumulated across every input group, so the whole
            // plane stays live; with a single input group only the three rows under the window do.
            const std::uint64_t rows = channel_groups(l.in_shape.channels) > 1 ? l.out_shape.height : 3;
            b.tmp_bits = std::max<std::uint64_t>(b.tmp_bits, rows * l.out_shape.width * kChannelGroup * 16);
            break;
        }
        case LayerKind::FullyConnected:
            b.weight_bits += l.in_shape.elements() * cout;
            b.tmp_bits = std::max<std::uint64_t>(b.tmp_bits, cout * 16);
            break;
        case LayerKind::BatchNorm: b.param_bits += 16 * cin; break;
        case LayerKind::Quantize: b.param_bits += 32 * cin; break;
        case LayerKind::PoolRelu: break;
        }
        if (l.consumes_ternary()) {
            // Map + value bits at density 1 for the input and for the next ternary tensor produced.
            std::uint64_t live = 2 * l.in_shape.elements();
            auto next = std::find_if(net.layers.begin() + static_cast<std::ptrdiff_t>(i) + 1, net.layers.end(),
                                     [](const LayerSpec& s) { return s.produces_ternary(); });
            live += next != net.layers.end() ? 2 * next->out_shape.elements() : 16 * l.out_shape.elements();
            b.activation_bits = std::max(b.activation_bits, live);
        }
    }
    return b;
}

} // namespace tbn
