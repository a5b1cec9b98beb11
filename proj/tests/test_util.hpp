#pragma once

#include "spikesim/fixed_point.hpp"
#include "spikesim/generator.hpp"
#include "spikesim/spike_tensor.hpp"

namespace spikesim::testing {

inline FixedTensor random_fixed_tensor(Rng &rng, std::vector<int> shape, int frac_bits = 4,
        int lo = -128, int hi = 127)
{
    FixedTensor t(std::move(shape), FixedPointFormat{frac_bits});
    for (auto &v : t.values) {
        v = static_cast<int8_t>(rng.uniform(lo, hi));
    }
    return t;
}

} // namespace spikesim::testing
