#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/generator.hpp"
#include "spikesim/spike_tensor.hpp"

using namespace spikesim;

TEST_CASE("all-zero and all-one counts")
{
    SpikeTensor t(3, 4, 4);
    CHECK(total_spikes(t) == 0);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                t.set(c, y, x, true);
            }
        }
    }
    CHECK(total_spikes(t) == 48);
}

TEST_CASE("popcount matches a naive per-element scan on random tensors")
{
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int c = rng.uniform(1, 5);
        int h = rng.uniform(1, 9);
        int w = rng.uniform(1, 9);
        SpikeTensor t(c, h, w);
        int64_t naive = 0;
        for (int ci = 0; ci < c; ++ci) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    bool bit = rng.bernoulli(0.4);
                    t.set(ci, y, x, bit);
                    naive += bit;
                }
            }
        }
        CHECK(total_spikes(t) == naive);
    }
}

TEST_CASE("total spikes is additive over channel slices")
{
    Rng rng(13);
    SpikeTensor t = random_spike_tensor(rng, 4, 6, 7, 0.3);
    int64_t by_channel = 0;
    for (int c = 0; c < t.channels; ++c) {
        by_channel += t.channel_slice(c).total_spikes();
    }
    CHECK(by_channel == total_spikes(t));
}

TEST_CASE("set then clear restores equality with a fresh tensor")
{
    SpikeTensor a(2, 3, 3);
    SpikeTensor b(2, 3, 3);
    a.set(1, 2, 2, true);
    CHECK_FALSE(a == b);
    a.set(1, 2, 2, false);
    CHECK(a == b);
}

TEST_CASE("out-of-range access is a contract violation")
{
    SpikeTensor t(1, 2, 2);
    CHECK_THROWS_AS(t.get(0, 2, 0), ContractViolation);
    CHECK_THROWS_AS(t.set(1, 0, 0, true), ContractViolation);
}
