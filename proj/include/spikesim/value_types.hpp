#pragma once

#include <cstdint>
#include <vector>

#include "spikesim/errors.hpp"

namespace spikesim {

struct Shape3 {
    int c = 0;
    int h = 0;
    int w = 0;

    int64_t count() const { return static_cast<int64_t>(c) * h * w; }
    bool operator==(const Shape3 &) const = default;
};

// Widened synaptic sums per neuron, raw units (value = v * 2^-frac_bits of the
// producing weights). Exact integer arithmetic; never saturates.
struct SumTensor {
    Shape3 shape;
    std::vector<int64_t> v;

    SumTensor() = default;
    explicit SumTensor(Shape3 s)
            : shape(s)
            , v(static_cast<size_t>(s.count()), 0)
    {
    }

    int64_t &at(int c, int y, int x)
    {
        return v[(static_cast<size_t>(c) * shape.h + y) * shape.w + x];
    }
    int64_t at(int c, int y, int x) const
    {
        return v[(static_cast<size_t>(c) * shape.h + y) * shape.w + x];
    }

    bool operator==(const SumTensor &) const = default;
};

// Window sums kept exact: integer spike counts over a known denominator
// (window^2). Average pooling output before any rounding.
struct PooledTensor {
    Shape3 shape;
    int denom = 1;
    std::vector<int32_t> counts;

    PooledTensor() = default;
    PooledTensor(Shape3 s, int denom_)
            : shape(s)
            , denom(denom_)
            , counts(static_cast<size_t>(s.count()), 0)
    {
    }

    int32_t &at(int c, int y, int x)
    {
        return counts[(static_cast<size_t>(c) * shape.h + y) * shape.w + x];
    }
    int32_t at(int c, int y, int x) const
    {
        return counts[(static_cast<size_t>(c) * shape.h + y) * shape.w + x];
    }

    bool operator==(const PooledTensor &) const = default;
};

// Class scores as exact rationals with a shared denominator.
struct ScoreVector {
    std::vector<int64_t> num;
    int64_t den = 1;

    int argmax() const
    {
        SPIKESIM_REQUIRE(!num.empty(), "argmax of empty score vector");
        int best = 0;
        for (int i = 1; i < static_cast<int>(num.size()); ++i) {
            if (num[i] > num[best]) {
                best = i; // ties keep the lowest class index
            }
        }
        return best;
    }

    bool operator==(const ScoreVector &) const = default;
};

} // namespace spikesim
