#include "spikesim/lif.hpp"

namespace spikesim {

LifStepResult lif_step(LifState &state, const LifParams &params, int64_t synaptic_sum)
{
    SPIKESIM_REQUIRE(params.valid(), "invalid LIF parameters");

    // Arithmetic right shift: floor division by 2^tau_shift.
    int64_t decayed = state.membrane >> params.tau_shift;
    int64_t m = decayed + synaptic_sum;

    LifStepResult r;
    if (m > kMembraneMax) {
        m = kMembraneMax;
        r.saturated = true;
    } else if (m < kMembraneMin) {
        m = kMembraneMin;
        r.saturated = true;
    }
    if (r.saturated) {
        state.saturations++;
    }

    r.spike = m >= params.threshold_raw;
    if (r.spike) {
        m = params.reset == ResetMode::HardZero ? 0 : m - params.threshold_raw;
    }
    state.membrane = m;
    return r;
}

} // namespace spikesim
