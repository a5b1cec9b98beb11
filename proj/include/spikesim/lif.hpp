#pragma once

#include <cstdint>

#include "spikesim/errors.hpp"

namespace spikesim {

enum class ResetMode { HardZero, Subtract };

// Leaky integrate-and-fire parameters. The decay factor is restricted to
// tau = 2^-tau_shift so decay is a multiplier-free arithmetic right shift
// (round toward negative infinity). tau_shift = 0 means tau = 1 (no leak).
struct LifParams {
    int tau_shift = 1;          // tau = 0.5 by default
    int32_t threshold_raw = 16; // same frac_bits as the weights
    ResetMode reset = ResetMode::HardZero;

    bool valid() const { return tau_shift >= 0 && tau_shift < 63 && threshold_raw > 0; }
    bool operator==(const LifParams &) const = default;
};

// Membrane accumulator register: 24-bit two's complement, weight frac_bits.
// Wide enough for a 9x9 kernel x 512 channels x |w|max with margin.
constexpr int kMembraneBits = 24;
constexpr int64_t kMembraneMax = (int64_t{1} << (kMembraneBits - 1)) - 1;
constexpr int64_t kMembraneMin = -(int64_t{1} << (kMembraneBits - 1));

struct LifState {
    int64_t membrane = 0;
    int64_t saturations = 0; // accumulator overflows (saturating, never wraps)
};

struct LifStepResult {
    bool spike = false;
    bool saturated = false;
};

// One timestep: membrane' = decay(tau * membrane) + synaptic_sum, fire on
// membrane' >= threshold, then reset per mode. Saturates into the 24-bit
// register and counts the event instead of trapping.
LifStepResult lif_step(LifState &state, const LifParams &params, int64_t synaptic_sum);

} // namespace spikesim
