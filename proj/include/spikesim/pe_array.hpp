#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spikesim/fixed_point.hpp"
#include "spikesim/lif.hpp"
#include "spikesim/qk_attention.hpp"
#include "spikesim/sparse_detect.hpp"
#include "spikesim/spike_tensor.hpp"

namespace spikesim {

// Bounded decoupling queue. A full queue stalls the producer (push fails and
// must be retried); entries are never dropped.
template <typename T>
class ElasticFifo {
public:
    explicit ElasticFifo(size_t capacity)
            : capacity_(capacity)
    {
        SPIKESIM_REQUIRE(capacity > 0, "FIFO capacity must be positive");
    }

    bool empty() const { return q_.empty(); }
    bool full() const { return q_.size() >= capacity_; }
    size_t occupancy() const { return q_.size(); }
    size_t capacity() const { return capacity_; }
    int64_t pushes() const { return pushes_; }
    int64_t pops() const { return pops_; }

    bool try_push(const T &v)
    {
        if (full()) {
            return false;
        }
        q_.push_back(v);
        pushes_++;
        return true;
    }

    const T &front() const
    {
        SPIKESIM_REQUIRE(!q_.empty(), "pop from empty FIFO");
        return q_.front();
    }

    T pop()
    {
        SPIKESIM_REQUIRE(!q_.empty(), "pop from empty FIFO");
        T v = q_.front();
        q_.pop_front();
        pops_++;
        return v;
    }

private:
    size_t capacity_;
    std::deque<T> q_;
    int64_t pushes_ = 0;
    int64_t pops_ = 0;
};

enum class StallCause {
    None,
    WeightFifoEmpty,
    SpikeFifoEmpty,
    BothEmpty,
    DispatchContention, // data ready but the dispatch budget ran out this cycle
    Drained,            // no tasks left for this PE
};

struct EpaConfig {
    int pe_rows = 8;
    int pe_cols = 8;
    int w_fifo_capacity = 16;
    int s_fifo_capacity = 16;
    int sdu_fifo_capacity = 64;
    int overhead_cycles = 2; // pipeline overhead per dispatched window
    double clock_hz = 2.0e8;
    int windows_per_cycle = 1; // PipeSDA -> S-FIFO production rate
    int weights_per_cycle = 8; // WMU -> W-FIFO production rate
    int wmu_latency = 0;       // cycles before the first weight token
    int dispatches_per_cycle = 1;
    int64_t max_cycles = 1'000'000'000;

    int pe_count() const { return pe_rows * pe_cols; }
    bool valid() const
    {
        return pe_rows >= 1 && pe_cols >= 1 && w_fifo_capacity >= 1 && s_fifo_capacity >= 1 &&
                sdu_fifo_capacity >= 1 && overhead_cycles >= 0 && clock_hz > 0 &&
                windows_per_cycle >= 1 && weights_per_cycle >= 1 && wmu_latency >= 0 &&
                dispatches_per_cycle >= 1 && max_cycles >= 1;
    }
};

// Per-layer counters. Every PE-cycle lands in exactly one bucket, so
// pe_count * total_cycles == compute_cycles + stalls + idle_drained.
struct CycleStats {
    int64_t total_cycles = 0;   // wall clock
    int64_t compute_cycles = 0; // busy PE-cycles summed over the array
    int64_t stall_wfifo = 0;
    int64_t stall_sfifo = 0;
    int64_t stall_both = 0;
    int64_t stall_contention = 0;
    int64_t idle_drained = 0;
    int64_t producer_backpressure_cycles = 0; // WMU/SDA cycles blocked on a full FIFO
    int64_t sdu_fifo_stalls = 0;              // SDU-unit pushes that found the FIFO full
    int64_t events_consumed = 0;              // includes residual unit events
    int64_t residual_events = 0;
    int64_t windows_dispatched = 0;
    int64_t spikes_emitted = 0; // PE emissions, before any write-back mask
    int64_t buffer_writes = 0;  // spiking-buffer write-backs
    int64_t lif_saturations = 0;
    int64_t fifo_pushes = 0; // W-FIFO + S-FIFO combined
    int64_t fifo_pops = 0;

    int64_t stall_cycles() const
    {
        return stall_wfifo + stall_sfifo + stall_both + stall_contention;
    }
    void add(const CycleStats &o);
    bool operator==(const CycleStats &) const = default;
};

// One window-task waiting for the array: an output neuron, its event window,
// and whether the shortcut path contributes a unit event.
struct WindowTask {
    int oc = 0;
    int oy = 0;
    int ox = 0;
    int vld_cnt = 0;
    bool residual = false;
};

struct PeState {
    std::span<const EventFifoEntry> window;
    int vld_cnt = 0;    // entry count of the event FIFO at dispatch time
    int event_cursor = 0;
    bool residual_pending = false;
    int64_t membrane_acc = 0;
    int oc = -1, oy = -1, ox = -1;
    int busy = 0; // cycles remaining

    bool idle() const { return busy == 0; }
};

struct DispatchDecision {
    bool fire = false;
    StallCause cause = StallCause::None;
    int busy_cycles = 0;
};

// Data-driven trigger: fires iff both FIFOs can supply this task, with
// busy = vld_cnt (+1 residual unit event) + overhead.
DispatchDecision dispatch(const WindowTask &task, bool weights_available,
        bool window_available, const EpaConfig &cfg);

// One event: fetch the tapped weight for the PE's output channel and add it
// to the membrane accumulator.
void pe_consume_event(PeState &pe, const EventFifoEntry &entry, const FixedTensor &weights);

// Conv (+ optional residual join) + LIF, executed event-driven on the array.
struct ConvLayerDesc {
    const FixedTensor *weights = nullptr; // [oc][ic][K][K]
    ConvGeometry geom;
    LifParams lif;
    const SpikeTensor *residual = nullptr; // unit-weight shortcut, output shape
};

// Applied at write-back time; may transform the stored bit (QK masking).
using WritebackFilter = std::function<bool(int oc, int oy, int ox, bool spike)>;

struct EvLayerResult {
    SpikeTensor output;
    CycleStats stats;
};

// Event-driven layer execution: PipeSDA builds the window grid, windows with
// any pending event are streamed through the elastic FIFOs and consumed one
// event per PE per cycle. Empty windows are never dispatched, so a silent
// region costs nothing. Output spikes are bit-identical to the dense
// reference path.
EvLayerResult run_layer_eventdriven(const ConvLayerDesc &layer, const SpikeTensor &input,
        const EpaConfig &cfg, const WritebackFilter &filter = {});

double layer_latency(const CycleStats &stats, const EpaConfig &cfg);

// One QK attention block run as two array passes with the attention register
// updated in the write-back path: Q recorded during its own write-back, K
// masked during its own write-back. No extra pass over the spiking buffer.
struct QkBlockRunResult {
    SpikeTensor output; // masked K
    SpikeTensor q_spikes;
    SpikeTensor k_spikes; // pre-mask
    CycleStats q_stats;
    CycleStats k_stats;
};

QkBlockRunResult run_qk_block_eventdriven(const SpikeTensor &x, const QkBlockSpec &spec,
        const EpaConfig &cfg);

} // namespace spikesim
