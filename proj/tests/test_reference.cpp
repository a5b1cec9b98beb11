#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spikesim/reference.hpp"
#include "test_util.hpp"

using namespace spikesim;
using spikesim::testing::random_fixed_tensor;

namespace {

// Independent six-loop oracle for the oracle: kept deliberately dumb.
SumTensor naive_conv(const SpikeTensor &in, const FixedTensor &w, int stride, int padding)
{
    int oc = w.shape[0];
    int ic = w.shape[1];
    int k = w.shape[2];
    int oh = (in.height + 2 * padding - k) / stride + 1;
    int ow = (in.width + 2 * padding - k) / stride + 1;
    SumTensor out({oc, oh, ow});
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                int64_t acc = 0;
                for (int i = 0; i < ic; ++i) {
                    for (int ki = 0; ki < k; ++ki) {
                        for (int kj = 0; kj < k; ++kj) {
                            int y = oy * stride + ki - padding;
                            int x = ox * stride + kj - padding;
                            if (y >= 0 && y < in.height && x >= 0 && x < in.width &&
                                    in.get(i, y, x)) {
                                acc += w.values[((static_cast<size_t>(o) * ic + i) * k + ki) * k +
                                        kj];
                            }
                        }
                    }
                }
                out.at(o, oy, ox) = acc;
            }
        }
    }
    return out;
}

} // namespace

TEST_CASE("zero input convolves to zero everywhere")
{
    Rng rng(21);
    SpikeTensor in(2, 6, 6);
    FixedTensor w = random_fixed_tensor(rng, {3, 2, 3, 3});
    SumTensor out = dense_conv_ref(in, w, 1, 1);
    for (int64_t v : out.v) {
        CHECK(v == 0);
    }
}

TEST_CASE("a single center spike stamps the point-reflected kernel")
{
    // Cross-correlation: out(s + d) = w[1 - dy][1 - dx] for a delta at s,
    // which is what enumerating the nine taps by hand gives.
    Rng rng(22);
    FixedTensor w = random_fixed_tensor(rng, {1, 1, 3, 3});
    SpikeTensor in(1, 5, 5);
    in.set(0, 2, 2, true);
    SumTensor out = dense_conv_ref(in, w, 1, 1);
    for (int oy = 0; oy < 5; ++oy) {
        for (int ox = 0; ox < 5; ++ox) {
            int dy = oy - 2;
            int dx = ox - 2;
            int64_t want = 0;
            if (dy >= -1 && dy <= 1 && dx >= -1 && dx <= 1) {
                want = w.at4(0, 0, 1 - dy, 1 - dx);
            }
            CHECK(out.at(0, oy, ox) == want);
        }
    }
}

TEST_CASE("dense conv matches the naive loop on random layers")
{
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        int ic = rng.uniform(1, 3);
        int oc = rng.uniform(1, 4);
        int k = rng.uniform(0, 1) ? 3 : 1;
        int s = rng.uniform(1, 2);
        int p = rng.uniform(0, 1);
        int h = rng.uniform(4, 9);
        int wdt = rng.uniform(4, 9);
        SpikeTensor in = random_spike_tensor(rng, ic, h, wdt, 0.4);
        FixedTensor w = random_fixed_tensor(rng, {oc, ic, k, k});
        CHECK(dense_conv_ref(in, w, s, p) == naive_conv(in, w, s, p));
    }
}

TEST_CASE("conv is linear over disjoint spike sets")
{
    Rng rng(24);
    FixedTensor w = random_fixed_tensor(rng, {2, 1, 3, 3});
    SpikeTensor a(1, 6, 6);
    SpikeTensor b(1, 6, 6);
    SpikeTensor both(1, 6, 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            if (rng.bernoulli(0.3)) {
                a.set(0, y, x, true);
                both.set(0, y, x, true);
            } else if (rng.bernoulli(0.3)) {
                b.set(0, y, x, true);
                both.set(0, y, x, true);
            }
        }
    }
    SumTensor ca = dense_conv_ref(a, w, 1, 1);
    SumTensor cb = dense_conv_ref(b, w, 1, 1);
    SumTensor cu = dense_conv_ref(both, w, 1, 1);
    for (size_t i = 0; i < cu.v.size(); ++i) {
        CHECK(cu.v[i] == ca.v[i] + cb.v[i]);
    }
}

TEST_CASE("average pooling keeps exact rationals")
{
    SpikeTensor ones(1, 4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            ones.set(0, y, x, true);
        }
    }
    PooledTensor full = avg_pool_ref(ones, 4);
    CHECK(full.denom == 16);
    CHECK(full.at(0, 0, 0) == 16); // 16/16 = 1

    SpikeTensor three(1, 4, 4);
    three.set(0, 0, 0, true);
    three.set(0, 1, 2, true);
    three.set(0, 3, 3, true);
    PooledTensor p = avg_pool_ref(three, 4);
    CHECK(p.at(0, 0, 0) == 3); // the 3/16 scale case
}

TEST_CASE("pool numerators equal window popcounts on random maps")
{
    Rng rng(25);
    SpikeTensor in = random_spike_tensor(rng, 3, 8, 8, 0.5);
    PooledTensor p = avg_pool_ref(in, 2);
    for (int c = 0; c < 3; ++c) {
        for (int oy = 0; oy < 4; ++oy) {
            for (int ox = 0; ox < 4; ++ox) {
                int count = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        count += in.get(c, oy * 2 + dy, ox * 2 + dx);
                    }
                }
                CHECK(p.at(c, oy, ox) == count);
            }
        }
    }
}

TEST_CASE("one-hot input through an FC selects the weight column")
{
    Rng rng(26);
    ModelGraph m;
    m.input = {1, 2, 2};
    LayerSpec fc;
    fc.kind = LayerKind::FullyConnected;
    fc.classes = 3;
    fc.features = 4;
    fc.weights = random_fixed_tensor(rng, {3, 4});
    m.layers.push_back(fc);
    m.validate();

    SpikeTensor in(1, 2, 2);
    in.set(0, 1, 0, true); // feature index 2
    ReferenceResult r = run_reference(m, in);
    for (int j = 0; j < 3; ++j) {
        CHECK(r.scores.num[j] == m.layers[0].weights.at2(j, 2));
    }
    CHECK(r.scores.den == 1);
}

TEST_CASE("avg-pool and ttfs-pool heads produce identical scores")
{
    Rng rng(27);
    for (int trial = 0; trial < 20; ++trial) {
        ModelGraph base;
        base.input = {2, 8, 8};
        LayerSpec conv;
        conv.kind = LayerKind::Conv;
        conv.in_channels = 2;
        conv.out_channels = 3;
        conv.kernel = 3;
        conv.stride = 1;
        conv.padding = 1;
        conv.weights = random_fixed_tensor(rng, {3, 2, 3, 3});
        base.layers.push_back(conv);
        LayerSpec lif;
        lif.kind = LayerKind::Lif;
        lif.lif = LifParams{1, 24, ResetMode::HardZero};
        base.layers.push_back(lif);
        LayerSpec pool;
        pool.kind = LayerKind::AvgPool;
        pool.window = 4;
        base.layers.push_back(pool);
        LayerSpec fc;
        fc.kind = LayerKind::FullyConnected;
        fc.classes = 4;
        fc.features = 3 * 2 * 2;
        fc.weights = random_fixed_tensor(rng, {4, 12});
        base.layers.push_back(fc);

        ModelGraph ttfs = base;
        ttfs.layers[2].kind = LayerKind::W2ttfsPool;
        base.validate();
        ttfs.validate();

        SpikeTensor in = random_spike_tensor(rng, 2, 8, 8, 0.5);
        ReferenceResult a = run_reference(base, in);
        ReferenceResult b = run_reference(ttfs, in);
        CHECK(a.scores == b.scores);
    }
}

TEST_CASE("a two-conv model matches a hand-built interpreter")
{
    Rng rng(28);
    ModelGraph m;
    m.input = {2, 6, 6};
    LayerSpec c1;
    c1.kind = LayerKind::Conv;
    c1.in_channels = 2;
    c1.out_channels = 3;
    c1.kernel = 3;
    c1.stride = 1;
    c1.padding = 1;
    c1.weights = random_fixed_tensor(rng, {3, 2, 3, 3});
    m.layers.push_back(c1);
    LayerSpec l1;
    l1.kind = LayerKind::Lif;
    l1.lif = LifParams{1, 20, ResetMode::HardZero};
    m.layers.push_back(l1);
    LayerSpec c2;
    c2.kind = LayerKind::Conv;
    c2.in_channels = 3;
    c2.out_channels = 2;
    c2.kernel = 3;
    c2.stride = 2;
    c2.padding = 1;
    c2.weights = random_fixed_tensor(rng, {2, 3, 3, 3});
    m.layers.push_back(c2);
    LayerSpec l2;
    l2.kind = LayerKind::Lif;
    l2.lif = LifParams{1, 20, ResetMode::HardZero};
    m.layers.push_back(l2);
    LayerSpec fc;
    fc.kind = LayerKind::FullyConnected;
    fc.classes = 3;
    fc.features = 2 * 3 * 3;
    fc.weights = random_fixed_tensor(rng, {3, 18});
    m.layers.push_back(fc);
    m.validate();

    SpikeTensor in = random_spike_tensor(rng, 2, 6, 6, 0.4);
    ReferenceResult got = run_reference(m, in);

    // Hand-built path: naive conv, threshold, naive conv, threshold, dot.
    auto threshold = [](const SumTensor &s, int32_t th) {
        SpikeTensor out(s.shape.c, s.shape.h, s.shape.w);
        for (int c = 0; c < s.shape.c; ++c) {
            for (int y = 0; y < s.shape.h; ++y) {
                for (int x = 0; x < s.shape.w; ++x) {
                    out.set(c, y, x, s.at(c, y, x) >= th);
                }
            }
        }
        return out;
    };
    SpikeTensor s1 = threshold(naive_conv(in, c1.weights, 1, 1), 20);
    SpikeTensor s2 = threshold(naive_conv(s1, c2.weights, 2, 1), 20);
    std::vector<int64_t> scores(3, 0);
    int f = 0;
    for (int c = 0; c < 2; ++c) {
        for (int y = 0; y < 3; ++y) {
            for (int x = 0; x < 3; ++x, ++f) {
                if (s2.get(c, y, x)) {
                    for (int j = 0; j < 3; ++j) {
                        scores[j] += fc.weights.at2(j, f);
                    }
                }
            }
        }
    }
    CHECK(got.scores.num == scores);

    // Determinism: bit-identical traces across runs.
    ReferenceResult again = run_reference(m, in);
    CHECK(again.scores == got.scores);
    REQUIRE(again.trace.size() == got.trace.size());
    for (size_t i = 0; i < got.trace.size(); ++i) {
        CHECK(got.trace[i].spikes == again.trace[i].spikes);
        CHECK(got.trace[i].synops == again.trace[i].synops);
    }
}
