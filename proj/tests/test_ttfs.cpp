#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/reference.hpp"
#include "spikesim/ttfs.hpp"
#include "test_util.hpp"

using namespace spikesim;
using spikesim::testing::random_fixed_tensor;

TEST_CASE("window spike counts")
{
    SpikeTensor map(1, 4, 4);
    CHECK(window_spike_count(map, 0, 0, 0, 4) == 0);

    map.set(0, 0, 0, true);
    map.set(0, 1, 2, true);
    map.set(0, 3, 3, true);
    CHECK(window_spike_count(map, 0, 0, 0, 4) == 3);

    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            map.set(0, y, x, true);
        }
    }
    CHECK(window_spike_count(map, 0, 0, 0, 4) == 16);

    CHECK_THROWS_AS(window_spike_count(map, 0, 1, 0, 4), ContractViolation);
    CHECK_THROWS_AS(window_spike_count(map, 1, 0, 0, 4), ContractViolation);
}

TEST_CASE("an all-zero map encodes entirely into slot 0")
{
    SpikeTensor map(3, 8, 8);
    TtfsCode code = w2ttfs_encode(map, 2, 2);
    CHECK(code.window_sq == 16);
    CHECK(code.slots[0].total_spikes() == 3 * 2 * 2);
    for (int slot = 1; slot < code.slot_count(); ++slot) {
        CHECK(code.slots[slot].total_spikes() == 0);
    }
}

TEST_CASE("a full window lands in the top slot")
{
    SpikeTensor map(1, 4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            map.set(0, y, x, true);
        }
    }
    TtfsCode code = w2ttfs_encode(map, 1, 1);
    CHECK(code.slots[16].get(0, 0, 0));
}

TEST_CASE("the code is one-hot and the slot equals the window count")
{
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        int c = rng.uniform(1, 4);
        int window = rng.uniform(0, 1) ? 2 : 4;
        int oh = rng.uniform(1, 3);
        int ow = rng.uniform(1, 3);
        SpikeTensor map = random_spike_tensor(rng, c, oh * window, ow * window,
                rng.uniform(0, 100) / 100.0);
        TtfsCode code = w2ttfs_encode(map, oh, ow);
        for (int ci = 0; ci < c; ++ci) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    int hits = 0;
                    int hot_slot = -1;
                    for (int slot = 0; slot < code.slot_count(); ++slot) {
                        if (code.slots[slot].get(ci, oy, ox)) {
                            hits++;
                            hot_slot = slot;
                        }
                    }
                    CHECK(hits == 1);
                    CHECK(hot_slot == window_spike_count(map, ci, oy, ox, window));
                }
            }
        }
    }
}

TEST_CASE("adding one spike moves the window exactly one slot up")
{
    Rng rng(32);
    SpikeTensor map = random_spike_tensor(rng, 1, 4, 4, 0.5);
    // Find a clear cell.
    int fy = -1, fx = -1;
    for (int y = 0; y < 4 && fy < 0; ++y) {
        for (int x = 0; x < 4 && fy < 0; ++x) {
            if (!map.get(0, y, x)) {
                fy = y;
                fx = x;
            }
        }
    }
    REQUIRE(fy >= 0);
    int before = window_spike_count(map, 0, 0, 0, 4);
    TtfsCode a = w2ttfs_encode(map, 1, 1);
    map.set(0, fy, fx, true);
    TtfsCode b = w2ttfs_encode(map, 1, 1);
    CHECK(a.slots[before].get(0, 0, 0));
    CHECK(b.slots[before + 1].get(0, 0, 0));
}

TEST_CASE("a slot-0-only code scores zero")
{
    Rng rng(33);
    SpikeTensor map(2, 4, 4);
    TtfsCode code = w2ttfs_encode(map, 2, 2);
    FixedTensor w = random_fixed_tensor(rng, {3, 8});
    ScoreVector s = ttfs_fc_exact(code, w, ScaleTable{4});
    for (int64_t v : s.num) {
        CHECK(v == 0);
    }
}

TEST_CASE("slot 3 with window 16 scales the weight column by 3/16")
{
    Rng rng(34);
    SpikeTensor map(2, 4, 4);
    // Three spikes in channel 1's single window.
    map.set(1, 0, 1, true);
    map.set(1, 2, 2, true);
    map.set(1, 3, 0, true);
    TtfsCode code = w2ttfs_encode(map, 1, 1);
    FixedTensor w = random_fixed_tensor(rng, {4, 2});
    ScoreVector s = ttfs_fc_exact(code, w, ScaleTable{16});
    CHECK(s.den == 16);
    for (int j = 0; j < 4; ++j) {
        CHECK(s.num[j] == 3 * w.at2(j, 1));
    }
}

TEST_CASE("exactness: ttfs scores equal FC of the average pool")
{
    Rng rng(35);
    for (int trial = 0; trial < 50; ++trial) {
        int c = rng.uniform(1, 4);
        int window = rng.uniform(0, 1) ? 2 : 4;
        int oh = rng.uniform(1, 2);
        int ow = rng.uniform(1, 2);
        int classes = rng.uniform(2, 5);
        SpikeTensor map = random_spike_tensor(rng, c, oh * window, ow * window,
                rng.uniform(0, 100) / 100.0);
        FixedTensor w = random_fixed_tensor(rng, {classes, c * oh * ow});

        ScoreVector ttfs = ttfs_fc_exact(w2ttfs_encode(map, oh, ow), w,
                ScaleTable{window * window});
        ScoreVector ap = fc_exact_pooled(avg_pool_ref(map, window), w);
        CHECK(ttfs == ap);
        CHECK(ttfs.argmax() == ap.argmax());
    }
}
