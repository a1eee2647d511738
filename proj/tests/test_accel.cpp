#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tbn/accel.hpp"
#include "tbn/error.hpp"
#include "tbn/fixtures.hpp"
#include "tbn/golden.hpp"

using namespace tbn;
using namespace tbn::accel;

namespace {

std::vector<int> random_counts(std::mt19937_64& rng, int n, int max) {
    std::vector<int> c(static_cast<std::size_t>(n));
    for (auto& x : c) x = static_cast<int>(rng() % static_cast<unsigned>(max + 1));
    return c;
}

AccelConfig mode(bool skip, bool reorder) {
    AccelConfig c;
    c.zero_skip_enabled = skip;
    c.reorder_enabled = reorder;
    return c;
}

} // namespace

TEST_SUITE("accel-sim") {

TEST_CASE("balance_workload: worked example without and with reorder") {
    const std::vector<int> counts{6, 6, 3, 1, 5, 4};
    const auto plain = balance_workload(counts, 3, false);
    CHECK(plain.pe_loads == std::vector<int>{12, 4, 9});
    CHECK(plain.makespan == 12);
    CHECK(plain.sort_cycles == 0);
    const auto sorted = balance_workload(counts, 3, true);
    CHECK(sorted.makespan == 9);
    CHECK(sorted.sort_cycles == 1);
    std::vector<int> loads = sorted.pe_loads;
    std::sort(loads.begin(), loads.end());
    CHECK(loads == std::vector<int>{7, 9, 9});
}

TEST_CASE("balance_workload: equal counts and invalid sizes") {
    const std::vector<int> eq(12, 4);
    CHECK(balance_workload(eq, 6, true).makespan == balance_workload(eq, 6, false).makespan);
    CHECK_THROWS_AS(balance_workload(std::vector<int>{1, 2, 3}, 2, true), Error);
    CHECK_THROWS_AS(balance_workload(std::vector<int>{}, 0, true), Error);
}

TEST_CASE("property: every group is assigned exactly once and makespan never increases") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 2000; ++trial) {
        const int pe = 1 + static_cast<int>(rng() % 6);
        const auto counts = random_counts(rng, 2 * pe, 16);
        for (bool reorder : {false, true}) {
            const auto a = balance_workload(counts, pe, reorder);
            std::vector<int> seen(counts.size(), 0);
            for (auto [x, y] : a.pe_pairs) ++seen[x], ++seen[y];
            REQUIRE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
            REQUIRE(a.makespan == *std::max_element(a.pe_loads.begin(), a.pe_loads.end()));
        }
        REQUIRE(balance_workload(counts, pe, true).makespan <= balance_workload(counts, pe, false).makespan);
        REQUIRE(balance_workload(counts, pe, true).makespan == oracle::best_pairing(counts));
    }
}

TEST_CASE("pe_run: priority encoder walks from the highest bit") {
    PeState s;
    s.pma = BitVector(7);
    s.pma.set(6, true);
    s.pma.set(4, true);
    s.pva = {1, 0};
    s.pwg.assign(7, 0xFFFFFFFFu);
    std::vector<int> order;
    const auto r = pe_run(s, true, &order);
    CHECK(r.cycles == 2);
    CHECK(r.macs == 2);
    CHECK(order == std::vector<int>{6, 4});
    // +1 then -1 against all-(+1) weights
    CHECK(std::all_of(s.psum.begin(), s.psum.end(), [](int v) { return v == 0; }));
    CHECK(s.pma.popcount() == 0);
}

TEST_CASE("pe_run: empty PMA and dense mode") {
    PeState empty;
    empty.pma = BitVector(5);
    empty.pwg.assign(5, 0);
    CHECK(pe_run(empty, true).cycles == 0);
    CHECK(std::all_of(empty.psum.begin(), empty.psum.end(), [](int v) { return v == 0; }));

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        PeState a;
        a.pma = BitVector(n);
        a.pwg.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            a.pwg[i] = static_cast<std::uint32_t>(rng());
            if (rng() % 2) {
                a.pma.set(i, true);
            }
        }
        for (std::size_t i = 0; i < a.pma.popcount(); ++i) a.pva.push_back(rng() & 1);
        PeState b = a;
        const auto skip = pe_run(a, true);
        const auto dense = pe_run(b, false);
        REQUIRE(skip.cycles == skip.macs);
        REQUIRE(dense.cycles == static_cast<int>(n));
        REQUIRE(a.psum == b.psum);
    }
}

TEST_CASE("pe_run: map / value disagreement is an error") {
    PeState s;
    s.pma = BitVector(3, true);
    s.pwg.assign(3, 0);
    s.pva = {1};
    CHECK_THROWS_AS(pe_run(s, true), Error);
    PeState t;
    t.pma = BitVector(3);
    t.pma.set(0, true);
    t.pwg.assign(3, 0);
    t.pva = {1, 1};
    CHECK_THROWS_AS(pe_run(t, true), Error);
}

TEST_CASE("conv layer: all-zero input costs only fetch and TMP traffic") {
    std::mt19937_64 rng(3);
    const Shape s{5, 6, 40};
    const auto w = BinaryWeightTensor::random(3, 3, 40, 40, rng);
    const auto r = simulate_conv_layer(encode_sparse(TernaryTensor(s)), w, AccelConfig{});
    CHECK(r.trace.executed_macs == 0);
    CHECK(r.trace.mac_cycles == 0);
    CHECK(r.trace.sort_cycles == 0);
    CHECK(r.trace.total_cycles == r.trace.fetch_cycles + r.trace.tmp_cycles);
    // per (output group, input group): 9 weight words per input channel plus one map word per position
    const std::uint64_t gout = 2, expect_fetch = gout * ((9 * 32 + 30) + (9 * 8 + 30));
    CHECK(r.trace.fetch_cycles == expect_fetch);
    CHECK(std::all_of(r.output.values.begin(), r.output.values.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("conv layer: random 8x8x32 matches golden, skip ratio tracks density") {
    std::mt19937_64 rng(4);
    const auto x = TernaryTensor::random(Shape{8, 8, 32}, 0.462, rng);
    const auto w = BinaryWeightTensor::random(3, 3, 32, 32, rng);
    const auto on = simulate_conv_layer(encode_sparse(x), w, mode(true, true));
    const auto off = simulate_conv_layer(encode_sparse(x), w, mode(false, false));
    CHECK(on.output == golden::ternary_conv3x3(x, w));
    CHECK(off.output == on.output);
    const double ratio = static_cast<double>(on.trace.executed_macs) / static_cast<double>(off.trace.executed_macs);
    // border positions feed fewer windows, so the ratio is close to but not exactly the density
    CHECK(ratio == doctest::Approx(x.density()).epsilon(0.03));
    CHECK(on.trace.total_cycles < off.trace.total_cycles);
}

TEST_CASE("property: conv and FC layers match golden across traversal orders and modes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const Shape s{1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 70)};
        const auto x = TernaryTensor::random(s, oracle::uniform01(rng), rng);
        const auto order = rng() & 1 ? TraversalOrder::PositionMajor : TraversalOrder::ChannelGroupMajor;
        const auto wc = BinaryWeightTensor::random(3, 3, s.channels, 1 + static_cast<int>(rng() % 70), rng);
        const auto wf = BinaryWeightTensor::random(1, 1, static_cast<int>(s.elements()), 1 + static_cast<int>(rng() % 130), rng);
        AccelConfig cfg = mode(rng() & 1, rng() & 1);
        cfg.pe_per_pcl = 1 + static_cast<int>(rng() % 6);
        cfg.dense_value_stream = rng() % 4 == 0;
        const auto c = simulate_conv_layer(encode_sparse(x, order), wc, cfg);
        REQUIRE(c.output == golden::ternary_conv3x3(x, wc));
        REQUIRE(c.trace.category_sum() == c.trace.total_cycles);
        REQUIRE(c.trace.executed_macs + c.trace.skipped_macs == c.trace.dense_macs);
        const auto f = simulate_fc_layer(encode_sparse(x, order), wf, cfg);
        REQUIRE(f.output == golden::fully_connected(x, wf));
        REQUIRE(f.trace.category_sum() == f.trace.total_cycles);
        REQUIRE(f.trace.executed_macs + f.trace.skipped_macs == f.trace.dense_macs);
    }
}

TEST_CASE("property: conv dense MAC count equals the analytic count") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape s{1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 70)};
        const int cout = 1 + static_cast<int>(rng() % 70);
        const auto x = TernaryTensor::random(s, 0.5, rng);
        const auto w = BinaryWeightTensor::random(3, 3, s.channels, cout, rng);
        std::uint64_t taps = 0;
        for (int y = 0; y < s.height; ++y)
            for (int xx = 0; xx < s.width; ++xx)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        taps += (y + dy >= 0 && y + dy < s.height && xx + dx >= 0 && xx + dx < s.width);
        const auto r = simulate_conv_layer(encode_sparse(x), w, AccelConfig{});
        REQUIRE(r.trace.dense_macs == taps * static_cast<std::uint64_t>(s.channels) * cout);
    }
}

TEST_CASE("property: random networks are bit-identical to golden") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const auto net = oracle::random_network(rng);
        const auto x = TernaryTensor::random(net.input_shape(), oracle::uniform01(rng), rng);
        const auto g = golden::infer(net, x);
        for (const auto& cfg : {mode(true, true), mode(true, false), AccelConfig::bnn_baseline(AccelConfig{})}) {
            const auto s = simulate_network(net, x, cfg);
            REQUIRE(s.logits == g.logits);
            REQUIRE(s.label == g.label);
            for (const auto& l : s.report.layers) REQUIRE(l.category_sum() == l.total_cycles);
        }
    }
}

TEST_CASE("property: zero skipping never costs cycles; equality only at density 1") {
    std::mt19937_64 rng(8);
    const Shape s{6, 6, 40};
    const auto w = BinaryWeightTensor::random(3, 3, 40, 33, rng);
    for (double d : {0.0, 0.1, 0.462, 0.9, 1.0}) {
        const auto x = encode_sparse(TernaryTensor::random(s, d, rng));
        for (bool reorder : {false, true}) {
            const auto on = simulate_conv_layer(x, w, mode(true, reorder)).trace.total_cycles;
            const auto off = simulate_conv_layer(x, w, mode(false, reorder)).trace.total_cycles;
            CAPTURE(d);
            CHECK(on <= off);
            if (d == 1.0) CHECK(on == off);
            else CHECK(on < off);
        }
    }
}

TEST_CASE("property: more PEs never cost cycles") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = oracle::random_network(rng);
        const auto x = TernaryTensor::random(net.input_shape(), 0.462, rng);
        std::uint64_t prev = UINT64_MAX;
        for (int pe : {1, 2, 3, 6}) {
            AccelConfig cfg = mode(true, false);
            cfg.pe_per_pcl = pe;
            const auto t = simulate_network(net, x, cfg).report.total_cycles();
            CHECK(t <= prev);
            prev = t;
        }
    }
}

TEST_CASE("determinism and report round trip") {
    auto net = default_topology();
    const auto probe = fixtures::synthetic_inputs(net.input_shape(), 2, 0.462, 3);
    fixtures::generate_params(net, probe, 3);
    const auto a = simulate_network(net, probe[0], AccelConfig{});
    const auto b = simulate_network(net, probe[0], AccelConfig{});
    const std::string text = format_report(a.report);
    CHECK(text == format_report(b.report));
    const auto parsed = parse_report(text);
    CHECK(format_report(parsed) == text);
    CHECK(parsed.total_cycles() == a.report.total_cycles());
    CHECK(parsed.config.clock_hz == a.report.config.clock_hz);
    CHECK(a.report.wall_time_s() == doctest::Approx(static_cast<double>(a.report.total_cycles()) / 10e6));
    CHECK_THROWS_AS(parse_report("nonsense"), Error);
}

TEST_CASE("event log lists units with cycle stamps") {
    std::mt19937_64 rng(10);
    const auto x = TernaryTensor::random(Shape{3, 3, 4}, 0.5, rng);
    const auto w = BinaryWeightTensor::random(3, 3, 4, 4, rng);
    std::ostringstream log;
    simulate_conv_layer(encode_sparse(x), w, AccelConfig{}, EventLog{&log});
    const std::string s = log.str();
    CHECK(s.find(" MAP fetch") != std::string::npos);
    CHECK(s.find(" WGH load") != std::string::npos);
    CHECK(s.find(" PCL window") != std::string::npos);
}

TEST_CASE("config validation") {
    AccelConfig c;
    c.xor_lanes_per_pe = 16;
    CHECK_THROWS_AS(c.validate(), Error);
    c = AccelConfig{};
    c.pe_per_pcl = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = AccelConfig{};
    c.clock_hz = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = AccelConfig{};
    c.pcl_count = 2;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(simulate_conv_layer(encode_sparse(TernaryTensor(Shape{2, 2, 1})),
                                        BinaryWeightTensor::random(3, 3, 1, 1, rng), c),
                    Error);
    const auto bnn = AccelConfig::bnn_baseline(AccelConfig{});
    CHECK_FALSE(bnn.zero_skip_enabled);
    CHECK_FALSE(bnn.reorder_enabled);
    CHECK(bnn.dense_value_stream);
}

} // TEST_SUITE
