#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spikesim/spike_tensor.hpp"

namespace spikesim {

// Geometry of one convolution layer as seen by the detection array.
struct ConvGeometry {
    int in_channels = 0;
    int in_h = 0;
    int in_w = 0;
    int kernel = 1;
    int stride = 1;
    int padding = 0;

    int out_h() const { return (in_h + 2 * padding - kernel) / stride + 1; }
    int out_w() const { return (in_w + 2 * padding - kernel) / stride + 1; }
    // Width of the virtual SDU ring: worst-case receptive-field overhang
    // past the real output grid.
    int border() const
    {
        int r = kernel - 1 - padding;
        return r > 0 ? r : 0;
    }
    bool valid() const
    {
        return in_channels > 0 && in_h > 0 && in_w > 0 && kernel > 0 &&
                (stride == 1 || stride == 2) && padding >= 0 && out_h() > 0 && out_w() > 0;
    }
};

struct SpikeEvent {
    int channel = 0;
    int y = 0;
    int x = 0;
    int64_t seq = 0; // strictly increasing in channel-major raster order

    bool operator==(const SpikeEvent &) const = default;
};

// Anchor output coordinate of a spike's receptive-field footprint. May be
// negative or exceed the real grid by up to the kernel radius.
struct CenterPosition {
    int oy = 0;
    int ox = 0;

    bool operator==(const CenterPosition &) const = default;
};

struct KernelTap {
    int ic = 0;
    int ki = 0;
    int kj = 0;

    bool operator==(const KernelTap &) const = default;
};

struct EventFifoEntry {
    int64_t seq = 0;
    KernelTap tap;

    bool operator==(const EventFifoEntry &) const = default;
};

// Inclusive output-coordinate range influenced by one spike, before any
// clipping to the real grid. Empty when lo > hi (stride-2 congruence misses).
struct InfluenceRange {
    int oy_lo = 0, oy_hi = -1;
    int ox_lo = 0, ox_hi = -1;

    int64_t count() const
    {
        if (oy_hi < oy_lo || ox_hi < ox_lo) {
            return 0;
        }
        return static_cast<int64_t>(oy_hi - oy_lo + 1) * (ox_hi - ox_lo + 1);
    }
};

InfluenceRange influence_range(const SpikeEvent &e, const ConvGeometry &g);

// Grid of sparse detection units. The real region is out_h x out_w; a virtual
// ring of width border() absorbs footprints that overhang the real grid, so
// no event is ever dropped. Virtual units accept writes but are excluded from
// read-out.
class SduGrid {
public:
    SduGrid() = default;
    SduGrid(const ConvGeometry &g, int fifo_capacity);

    int out_h() const { return out_h_; }
    int out_w() const { return out_w_; }
    int border() const { return border_; }
    int fifo_capacity() const { return fifo_capacity_; }

    bool in_grid(int oy, int ox) const
    {
        return oy >= -border_ && oy < out_h_ + border_ && ox >= -border_ && ox < out_w_ + border_;
    }
    bool is_real(int oy, int ox) const
    {
        return oy >= 0 && oy < out_h_ && ox >= 0 && ox < out_w_;
    }

    void append(int oy, int ox, const EventFifoEntry &entry);

    const std::vector<EventFifoEntry> &entries(int oy, int ox) const;

    int64_t total_entries() const;
    int64_t real_entries() const;
    int64_t virtual_entries() const { return total_entries() - real_entries(); }
    // Pushes that found the unit FIFO already at capacity. The producer
    // stalls and retries in hardware; the model records and retains.
    int64_t backpressure_stalls() const { return backpressure_stalls_; }

    bool operator==(const SduGrid &o) const
    {
        return out_h_ == o.out_h_ && out_w_ == o.out_w_ && border_ == o.border_ && units_ == o.units_;
    }

private:
    size_t unit_index(int oy, int ox) const;

    int out_h_ = 0;
    int out_w_ = 0;
    int border_ = 0;
    int fifo_capacity_ = 64;
    int64_t backpressure_stalls_ = 0;
    std::vector<std::vector<EventFifoEntry>> units_;
};

// Stage 1: indexes of all valid spikes, channel-major raster order.
std::vector<SpikeEvent> index_generation(const SpikeTensor &map);

// Stage 2: receptive-field anchor for one spike event.
CenterPosition cp_generation(const SpikeEvent &e, const ConvGeometry &g);

// Stage 3: broadcast each event's diffusion region and append one FIFO entry
// per influenced unit, tagged with the kernel tap the event multiplies.
void cp_map_diffuse(std::span<const SpikeEvent> events, SduGrid &grid, const ConvGeometry &g);

// Read-out of one real unit's window for the PE array.
std::pair<int, std::span<const EventFifoEntry>> read_window(const SduGrid &grid, int oy, int ox);

// The three stages run back to back.
SduGrid build_sdu_grid(const SpikeTensor &map, const ConvGeometry &g, int fifo_capacity = 64);

// The three stages run as a pipeline over bounded queues. quantum_* bound how
// many items each stage moves per step, so different interleavings can be
// exercised; results are identical to build_sdu_grid for every schedule.
SduGrid build_sdu_grid_pipelined(const SpikeTensor &map, const ConvGeometry &g,
        int fifo_capacity = 64, int quantum_ig = 1, int quantum_cp = 1, int quantum_map = 1,
        int queue_capacity = 8);

} // namespace spikesim
