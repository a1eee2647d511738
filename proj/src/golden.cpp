#include "tbn/golden.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "tbn/error.hpp"
#include "tbn/kernels.hpp"

namespace tbn::golden {

std::int16_t checked_psum(std::int64_t v) {
    if (v < std::numeric_limits<std::int16_t>::min() || v > std::numeric_limits<std::int16_t>::max())
        fail(ErrorKind::Overflow, "partial sum " + std::to_string(v) + " exceeds the 16-bit range");
    return static_cast<std::int16_t>(v);
}

PartialSumTensor ternary_conv3x3(const TernaryTensor& x, const BinaryWeightTensor& w) {
    const Shape in = x.shape();
    require(w.kernel_h() == 3 && w.kernel_w() == 3, ErrorKind::Config, "ternary_conv3x3 needs a 3x3 kernel");
    require(w.in_channels() == in.channels, ErrorKind::Config, "ternary_conv3x3: weight in_channels mismatch");
    const int cin = in.channels;
    const int cout = w.out_channels();
    const std::size_t taps = 9 * static_cast<std::size_t>(cin);

    // Weights as +-1 bytes, one contiguous (kr, kc, ic) row per output channel.
    std::vector<std::int8_t> wt(taps * cout);
    for (int oc = 0; oc < cout; ++oc)
        for (int kr = 0; kr < 3; ++kr)
            for (int kc = 0; kc < 3; ++kc)
                for (int ic = 0; ic < cin; ++ic)
                    wt[oc * taps + (kr * 3 + kc) * cin + ic] = static_cast<std::int8_t>(w.sign(kr, kc, ic, oc));

    const auto& k = kernels::active();
    PartialSumTensor out(Shape{in.height, in.width, cout});
    std::vector<std::int8_t> patch(taps);
    for (int y = 0; y < in.height; ++y)
        for (int xcol = 0; xcol < in.width; ++xcol) {
            std::fill(patch.begin(), patch.end(), 0);
            for (int kr = 0; kr < 3; ++kr) {
                const int iy = y + kr - 1;
                if (iy < 0 || iy >= in.height) continue;
                for (int kc = 0; kc < 3; ++kc) {
                    const int ix = xcol + kc - 1;
                    if (ix < 0 || ix >= in.width) continue;
                    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(x.index(iy, ix, 0)), cin,
                                patch.begin() + (kr * 3 + kc) * cin);
                }
            }
            for (int oc = 0; oc < cout; ++oc)
                out.values[out.index(y, xcol, oc)] = checked_psum(k.ternary_dot(patch.data(), wt.data() + oc * taps, taps));
        }
    return out;
}

PartialSumTensor fully_connected(const TernaryTensor& x, const BinaryWeightTensor& w) {
    const std::size_t n = x.shape().elements();
    require(w.kernel_h() == 1 && w.kernel_w() == 1, ErrorKind::Config, "fully_connected needs a 1x1 kernel");
    require(static_cast<std::size_t>(w.in_channels()) == n, ErrorKind::Config,
            "fully_connected: weight in_channels " + std::to_string(w.in_channels()) + " != input size " +
                std::to_string(n));
    const int cout = w.out_channels();

    std::vector<std::int8_t> flat(n);
    const Traversal trav(x.shape(), TraversalOrder::ChannelGroupMajor);
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = trav.element(i);
        flat[i] = x.data()[e.position * x.shape().channels + e.channel];
    }
    std::vector<std::int8_t> col(n);
    const auto& k = kernels::active();
    PartialSumTensor out(Shape{1, 1, cout});
    for (int oc = 0; oc < cout; ++oc) {
        for (std::size_t i = 0; i < n; ++i)
            col[i] = static_cast<std::int8_t>(w.sign(0, 0, static_cast<int>(i), oc));
        out.values[oc] = checked_psum(k.ternary_dot(flat.data(), col.data(), n));
    }
    return out;
}

PartialSumTensor pool_relu(const PartialSumTensor& x) {
    require(x.shape.height % 2 == 0 && x.shape.width % 2 == 0, ErrorKind::Config,
            "pool_relu needs even height and width");
    PartialSumTensor out(Shape{x.shape.height / 2, x.shape.width / 2, x.shape.channels});
    for (int y = 0; y < out.shape.height; ++y)
        for (int xc = 0; xc < out.shape.width; ++xc)
            for (int c = 0; c < out.shape.channels; ++c) {
                const std::int16_t m = std::max({x.at(2 * y, 2 * xc, c), x.at(2 * y, 2 * xc + 1, c),
                                                 x.at(2 * y + 1, 2 * xc, c), x.at(2 * y + 1, 2 * xc + 1, c)});
                out.values[out.index(y, xc, c)] = std::max<std::int16_t>(m, 0);
            }
    return out;
}

std::int16_t bn_scale(std::int16_t x, std::int16_t factor, std::size_t* saturations) {
    const std::int64_t product = std::int64_t{x} * factor;
    // floor division by 256, then round half to even on the remainder
    std::int64_t q = product >> 8;
    const std::int64_t rem = product - (q << 8);
    if (rem > 128 || (rem == 128 && (q & 1))) ++q;
    if (q > std::numeric_limits<std::int16_t>::max() || q < std::numeric_limits<std::int16_t>::min()) {
        if (saturations) ++*saturations;
        q = std::clamp<std::int64_t>(q, std::numeric_limits<std::int16_t>::min(), std::numeric_limits<std::int16_t>::max());
    }
    return static_cast<std::int16_t>(q);
}

PartialSumTensor batch_norm(const PartialSumTensor& x, std::span<const std::int16_t> factors,
                            std::size_t* saturations) {
    require(factors.size() == static_cast<std::size_t>(x.shape.channels), ErrorKind::Config,
            "batch_norm: factor count != channels");
    PartialSumTensor out(x.shape);
    const int c = x.shape.channels;
    for (std::size_t i = 0; i < x.values.size(); ++i)
        out.values[i] = bn_scale(x.values[i], factors[i % c], saturations);
    return out;
}

TernaryTensor quantize_ternary(const PartialSumTensor& x, std::span<const QuantThreshold> thresholds) {
    require(thresholds.size() == static_cast<std::size_t>(x.shape.channels), ErrorKind::Config,
            "quantize: threshold count != channels");
    std::vector<std::int8_t> data(x.values.size());
    const int c = x.shape.channels;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const QuantThreshold& t = thresholds[i % c];
        require(t.neg < t.pos, ErrorKind::Config, "quantize thresholds need neg < pos");
        const std::int16_t v = x.values[i];
        data[i] = v > t.pos ? 1 : (v < t.neg ? -1 : 0);
    }
    return TernaryTensor(x.shape, std::move(data));
}

Activation apply_layer(const LayerSpec& layer, const Activation& in, std::size_t* saturations) {
    switch (layer.kind) {
    case LayerKind::Conv3x3: return ternary_conv3x3(std::get<TernaryTensor>(in), *layer.weights);
    case LayerKind::FullyConnected: return fully_connected(std::get<TernaryTensor>(in), *layer.weights);
    case LayerKind::PoolRelu: return pool_relu(std::get<PartialSumTensor>(in));
    case LayerKind::BatchNorm: return batch_norm(std::get<PartialSumTensor>(in), layer.bn_factors, saturations);
    case LayerKind::Quantize: return quantize_ternary(std::get<PartialSumTensor>(in), layer.thresholds);
    }
    fail(ErrorKind::Config, "unknown layer kind");
}

int argmax(std::span<const std::int32_t> logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

InferenceResult infer(const NetworkConfig& net, const TernaryTensor& x, bool record_inputs) {
    net.validate(true);
    require(x.shape() == net.input_shape(), ErrorKind::Config, "input shape does not match the network");
    InferenceResult result;
    Activation act = x;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& layer = net.layers[i];
        if (record_inputs && layer.consumes_ternary())
            result.layer_inputs.emplace_back(i, std::get<TernaryTensor>(act));
        act = apply_layer(layer, act, &result.bn_saturations);
    }
    const auto& out = std::get<PartialSumTensor>(act);
    result.logits.assign(out.values.begin(), out.values.end());
    result.label = argmax(result.logits);
    return result;
}

} // namespace tbn::golden
