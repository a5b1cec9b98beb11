#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/reference.hpp"
#include "spikesim/sparse_detect.hpp"
#include "test_util.hpp"

using namespace spikesim;
using spikesim::testing::random_fixed_tensor;

namespace {

// Independent oracle: which events does output (oy, ox) read under the dense
// formula, and through which kernel tap?
std::vector<EventFifoEntry> dense_window(const std::vector<SpikeEvent> &events,
        const ConvGeometry &g, int oy, int ox)
{
    std::vector<EventFifoEntry> want;
    for (const SpikeEvent &e : events) {
        int ki = e.y - (oy * g.stride - g.padding);
        int kj = e.x - (ox * g.stride - g.padding);
        if (ki >= 0 && ki < g.kernel && kj >= 0 && kj < g.kernel) {
            want.push_back({e.seq, {e.channel, ki, kj}});
        }
    }
    return want;
}

} // namespace

TEST_CASE("index generation enumerates spikes in raster order")
{
    SpikeTensor map(2, 4, 4);
    CHECK(index_generation(map).empty());

    map.set(0, 2, 3, true);
    auto one = index_generation(map);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == SpikeEvent{0, 2, 3, 0});

    Rng rng(41);
    SpikeTensor rnd = random_spike_tensor(rng, 3, 7, 5, 0.4);
    auto events = index_generation(rnd);
    CHECK(static_cast<int64_t>(events.size()) == rnd.total_spikes());
    // Naive scan oracle with explicit ordering.
    size_t i = 0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 7; ++y) {
            for (int x = 0; x < 5; ++x) {
                if (rnd.get(c, y, x)) {
                    REQUIRE(i < events.size());
                    CHECK(events[i].channel == c);
                    CHECK(events[i].y == y);
                    CHECK(events[i].x == x);
                    CHECK(events[i].seq == static_cast<int64_t>(i));
                    i++;
                }
            }
        }
    }
    CHECK(i == events.size());
}

TEST_CASE("an interior spike influences the full 3x3 neighborhood")
{
    ConvGeometry g{1, 4, 4, 3, 1, 1};
    InfluenceRange r = influence_range(SpikeEvent{0, 1, 1, 0}, g);
    CHECK(r.oy_lo == 0);
    CHECK(r.oy_hi == 2);
    CHECK(r.ox_lo == 0);
    CHECK(r.ox_hi == 2);
    CHECK(cp_generation(SpikeEvent{0, 1, 1, 0}, g) == CenterPosition{0, 0});
}

TEST_CASE("a corner spike overhangs into the virtual ring")
{
    ConvGeometry g{1, 4, 4, 3, 1, 1};
    SpikeTensor map(1, 4, 4);
    map.set(0, 0, 0, true);
    SduGrid grid = build_sdu_grid(map, g);
    CHECK(grid.border() == 1);
    // Unclipped footprint {-1..1}^2 = 9; the real grid keeps {0,1}^2.
    CHECK(grid.total_entries() == 9);
    CHECK(grid.real_entries() == 4);
    CHECK(grid.virtual_entries() == 5);
    for (int oy = 0; oy < 2; ++oy) {
        for (int ox = 0; ox < 2; ++ox) {
            auto [vld, entries] = read_window(grid, oy, ox);
            REQUIRE(vld == 1);
            CHECK(entries[0].tap == KernelTap{0, 1 - oy, 1 - ox});
        }
    }
}

TEST_CASE("a 1x1 kernel maps each spike onto itself")
{
    ConvGeometry g{1, 4, 4, 1, 1, 0};
    SpikeEvent e{0, 2, 3, 0};
    InfluenceRange r = influence_range(e, g);
    CHECK(r.oy_lo == 2);
    CHECK(r.oy_hi == 2);
    CHECK(r.ox_lo == 3);
    CHECK(r.ox_hi == 3);
    CHECK(cp_generation(e, g) == CenterPosition{2, 3});
    CHECK(g.border() == 0);
}

TEST_CASE("one interior spike produces nine uniquely-tapped entries")
{
    ConvGeometry g{2, 5, 5, 3, 1, 1};
    SpikeTensor map(2, 5, 5);
    map.set(1, 2, 2, true);
    SduGrid grid = build_sdu_grid(map, g);
    CHECK(grid.total_entries() == 9);
    for (int oy = 1; oy <= 3; ++oy) {
        for (int ox = 1; ox <= 3; ++ox) {
            auto [vld, entries] = read_window(grid, oy, ox);
            REQUIRE(vld == 1);
            CHECK(entries[0].tap == KernelTap{1, 2 - (oy - 1), 2 - (ox - 1)});
        }
    }
}

TEST_CASE("stride-2 diffusion respects the congruence filter")
{
    ConvGeometry g{1, 8, 8, 3, 2, 1};
    // Even coordinate: exactly one output row; odd: two.
    InfluenceRange even = influence_range(SpikeEvent{0, 2, 2, 0}, g);
    CHECK(even.oy_lo == 1);
    CHECK(even.oy_hi == 1);
    InfluenceRange odd = influence_range(SpikeEvent{0, 3, 3, 0}, g);
    CHECK(odd.oy_lo == 1);
    CHECK(odd.oy_hi == 2);

    Rng rng(42);
    SpikeTensor map = random_spike_tensor(rng, 1, 8, 8, 0.5);
    SduGrid grid = build_sdu_grid(map, g);
    auto events = index_generation(map);
    for (int oy = 0; oy < g.out_h(); ++oy) {
        for (int ox = 0; ox < g.out_w(); ++ox) {
            auto [vld, entries] = read_window(grid, oy, ox);
            std::vector<EventFifoEntry> got(entries.begin(), entries.end());
            CHECK(got == dense_window(events, g, oy, ox));
            CHECK(vld == static_cast<int>(got.size()));
        }
    }
}

TEST_CASE("event conservation across real and virtual units")
{
    Rng rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        ConvGeometry g;
        g.in_channels = rng.uniform(1, 4);
        g.in_h = rng.uniform(4, 10);
        g.in_w = rng.uniform(4, 10);
        g.kernel = rng.uniform(0, 1) ? 3 : 1;
        g.stride = rng.uniform(1, 2);
        g.padding = rng.uniform(0, 1);
        SpikeTensor map = random_spike_tensor(rng, g.in_channels, g.in_h, g.in_w, 0.4);
        SduGrid grid = build_sdu_grid(map, g);

        int64_t unclipped = 0;
        for (const SpikeEvent &e : index_generation(map)) {
            unclipped += influence_range(e, g).count();
        }
        CHECK(grid.total_entries() == unclipped);
        CHECK(grid.real_entries() == conv_incidence_count(map, g.kernel, g.stride, g.padding));
    }
}

TEST_CASE("sparse window sums equal the dense convolution")
{
    // The module's master property: summing the tapped weights of each
    // window reproduces dense_conv_ref exactly, for every output channel.
    Rng rng(44);
    for (int trial = 0; trial < 30; ++trial) {
        ConvGeometry g;
        g.in_channels = rng.uniform(1, 3);
        g.in_h = rng.uniform(4, 9);
        g.in_w = rng.uniform(4, 9);
        g.kernel = rng.uniform(0, 1) ? 3 : 1;
        g.stride = rng.uniform(1, 2);
        g.padding = rng.uniform(0, 1);
        int oc = rng.uniform(1, 3);
        SpikeTensor map = random_spike_tensor(rng, g.in_channels, g.in_h, g.in_w, 0.5);
        FixedTensor w = random_fixed_tensor(rng, {oc, g.in_channels, g.kernel, g.kernel});
        SduGrid grid = build_sdu_grid(map, g);
        SumTensor dense = dense_conv_ref(map, w, g.stride, g.padding);
        for (int o = 0; o < oc; ++o) {
            for (int oy = 0; oy < g.out_h(); ++oy) {
                for (int ox = 0; ox < g.out_w(); ++ox) {
                    int64_t acc = 0;
                    for (const EventFifoEntry &e : read_window(grid, oy, ox).second) {
                        acc += w.at4(o, e.tap.ic, e.tap.ki, e.tap.kj);
                    }
                    CHECK(acc == dense.at(o, oy, ox));
                }
            }
        }
    }
}

TEST_CASE("reading a virtual unit is a contract violation")
{
    ConvGeometry g{1, 4, 4, 3, 1, 1};
    SpikeTensor map(1, 4, 4);
    SduGrid grid = build_sdu_grid(map, g);
    CHECK_THROWS_AS(read_window(grid, -1, 0), ContractViolation);
    CHECK_THROWS_AS(read_window(grid, 0, 4), ContractViolation);
}

TEST_CASE("pipelined staging matches the fused pass for every schedule")
{
    Rng rng(45);
    for (int trial = 0; trial < 10; ++trial) {
        ConvGeometry g{2, 8, 8, 3, 1, 1};
        SpikeTensor map = random_spike_tensor(rng, 2, 8, 8, 0.6);
        SduGrid fused = build_sdu_grid(map, g);
        for (auto [qi, qc, qm, qcap] : {std::array<int, 4>{1, 1, 1, 1},
                     std::array<int, 4>{1, 1, 1, 8}, std::array<int, 4>{3, 1, 5, 2},
                     std::array<int, 4>{64, 64, 64, 4}, std::array<int, 4>{2, 7, 1, 3}}) {
            SduGrid staged = build_sdu_grid_pipelined(map, g, 64, qi, qc, qm, qcap);
            CHECK(staged == fused);
        }
    }
}

TEST_CASE("unit FIFO overflow is recorded, never dropped")
{
    ConvGeometry g{8, 4, 4, 3, 1, 1};
    SpikeTensor map(8, 4, 4);
    for (int c = 0; c < 8; ++c) {
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                map.set(c, y, x, true);
            }
        }
    }
    SduGrid small = build_sdu_grid(map, g, 4); // interior windows need 8*9 entries
    SduGrid big = build_sdu_grid(map, g, 4096);
    CHECK(small.backpressure_stalls() > 0);
    CHECK(big.backpressure_stalls() == 0);
    CHECK(small.total_entries() == big.total_entries()); // drop-free
}
