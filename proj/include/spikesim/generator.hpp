#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "spikesim/container.hpp"
#include "spikesim/model.hpp"

namespace spikesim {

// Deterministic RNG wrapper: portable across standard libraries because it
// never uses std distributions.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed)
            : eng(seed)
    {
    }

    uint64_t next() { return eng(); }

    // Uniform integer in [lo, hi], inclusive.
    int uniform(int lo, int hi)
    {
        SPIKESIM_REQUIRE(hi >= lo, "bad uniform range");
        return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
    }

    bool bernoulli(double p)
    {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
    }
};

struct GenOptions {
    uint64_t seed = 1;
    std::string arch = "qk-resnet-toy"; // fc-min | conv-tiny | qk-resnet-toy
    int images = 4;
    double density = 0.25;
    int frac_bits = 4;
    bool with_labels = true;
};

// Seeded synthetic model with random quantized weights at toy shapes.
// The classifier weights are snapped to multiples of window^2 so the
// time-reuse shift path of the FC core stays bit-exact.
ModelGraph generate_model(const GenOptions &opt);

SpikeTensor random_spike_tensor(Rng &rng, int c, int h, int w, double density);

InputBundle generate_inputs(const ModelGraph &model, const GenOptions &opt);

} // namespace spikesim
