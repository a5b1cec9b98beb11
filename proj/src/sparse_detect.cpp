#include "spikesim/sparse_detect.hpp"

#include <deque>

namespace spikesim {

namespace {

int floor_div(int a, int b)
{
    int q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int ceil_div(int a, int b)
{
    return -floor_div(-a, b);
}

} // namespace

InfluenceRange influence_range(const SpikeEvent &e, const ConvGeometry &g)
{
    // Output (oy, ox) reads input (y, x) iff oy*s - p <= y <= oy*s - p + K - 1
    // and likewise for x. Solving for oy gives the inclusive range below;
    // stride-2 congruence misses fall out as empty ranges.
    InfluenceRange r;
    r.oy_lo = ceil_div(e.y + g.padding - g.kernel + 1, g.stride);
    r.oy_hi = floor_div(e.y + g.padding, g.stride);
    r.ox_lo = ceil_div(e.x + g.padding - g.kernel + 1, g.stride);
    r.ox_hi = floor_div(e.x + g.padding, g.stride);
    return r;
}

SduGrid::SduGrid(const ConvGeometry &g, int fifo_capacity)
        : out_h_(g.out_h())
        , out_w_(g.out_w())
        , border_(g.border())
        , fifo_capacity_(fifo_capacity)
{
    SPIKESIM_REQUIRE(g.valid(), "invalid conv geometry for SDU grid");
    SPIKESIM_REQUIRE(fifo_capacity > 0, "SDU FIFO capacity must be positive");
    size_t n = static_cast<size_t>(out_h_ + 2 * border_) * (out_w_ + 2 * border_);
    units_.assign(n, {});
}

size_t SduGrid::unit_index(int oy, int ox) const
{
    SPIKESIM_REQUIRE(in_grid(oy, ox), "SDU coordinate outside real+virtual grid");
    return static_cast<size_t>(oy + border_) * (out_w_ + 2 * border_) + (ox + border_);
}

void SduGrid::append(int oy, int ox, const EventFifoEntry &entry)
{
    auto &fifo = units_[unit_index(oy, ox)];
    if (static_cast<int>(fifo.size()) >= fifo_capacity_) {
        backpressure_stalls_++;
    }
    fifo.push_back(entry);
}

const std::vector<EventFifoEntry> &SduGrid::entries(int oy, int ox) const
{
    return units_[unit_index(oy, ox)];
}

int64_t SduGrid::total_entries() const
{
    int64_t n = 0;
    for (const auto &u : units_) {
        n += static_cast<int64_t>(u.size());
    }
    return n;
}

int64_t SduGrid::real_entries() const
{
    int64_t n = 0;
    for (int oy = 0; oy < out_h_; ++oy) {
        for (int ox = 0; ox < out_w_; ++ox) {
            n += static_cast<int64_t>(entries(oy, ox).size());
        }
    }
    return n;
}

std::vector<SpikeEvent> index_generation(const SpikeTensor &map)
{
    std::vector<SpikeEvent> events;
    events.reserve(static_cast<size_t>(map.total_spikes()));
    int64_t seq = 0;
    for (int c = 0; c < map.channels; ++c) {
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                if (map.get(c, y, x)) {
                    events.push_back({c, y, x, seq++});
                }
            }
        }
    }
    return events;
}

CenterPosition cp_generation(const SpikeEvent &e, const ConvGeometry &g)
{
    InfluenceRange r = influence_range(e, g);
    return {r.oy_lo, r.ox_lo};
}

namespace {

void diffuse_one(const SpikeEvent &e, SduGrid &grid, const ConvGeometry &g)
{
    InfluenceRange r = influence_range(e, g);
    for (int oy = r.oy_lo; oy <= r.oy_hi; ++oy) {
        for (int ox = r.ox_lo; ox <= r.ox_hi; ++ox) {
            KernelTap tap{e.channel, e.y - (oy * g.stride - g.padding),
                    e.x - (ox * g.stride - g.padding)};
            grid.append(oy, ox, {e.seq, tap});
        }
    }
}

} // namespace

void cp_map_diffuse(std::span<const SpikeEvent> events, SduGrid &grid, const ConvGeometry &g)
{
    for (const SpikeEvent &e : events) {
        diffuse_one(e, grid, g);
    }
}

std::pair<int, std::span<const EventFifoEntry>> read_window(const SduGrid &grid, int oy, int ox)
{
    SPIKESIM_REQUIRE(grid.is_real(oy, ox), "read_window on a virtual SDU");
    const auto &fifo = grid.entries(oy, ox);
    return {static_cast<int>(fifo.size()), std::span<const EventFifoEntry>(fifo)};
}

SduGrid build_sdu_grid(const SpikeTensor &map, const ConvGeometry &g, int fifo_capacity)
{
    SduGrid grid(g, fifo_capacity);
    std::vector<SpikeEvent> events = index_generation(map);
    cp_map_diffuse(events, grid, g);
    return grid;
}

SduGrid build_sdu_grid_pipelined(const SpikeTensor &map, const ConvGeometry &g,
        int fifo_capacity, int quantum_ig, int quantum_cp, int quantum_map, int queue_capacity)
{
    SPIKESIM_REQUIRE(quantum_ig > 0 && quantum_cp > 0 && quantum_map > 0 && queue_capacity > 0,
            "pipeline quanta and queue capacity must be positive");
    SduGrid grid(g, fifo_capacity);

    struct CpMessage {
        SpikeEvent event;
        CenterPosition cp;
    };
    std::deque<SpikeEvent> ig_out;
    std::deque<CpMessage> cp_out;

    // Index-generation cursor over the raster scan.
    int c = 0, y = 0, x = 0;
    bool ig_done = map.size() == 0;
    int64_t seq = 0;

    auto step_ig = [&]() {
        for (int n = 0; n < quantum_ig && !ig_done; ) {
            if (static_cast<int>(ig_out.size()) >= queue_capacity) {
                return; // backpressure from the CP stage
            }
            if (map.get(c, y, x)) {
                ig_out.push_back({c, y, x, seq++});
                ++n;
            }
            if (++x == map.width) {
                x = 0;
                if (++y == map.height) {
                    y = 0;
                    if (++c == map.channels) {
                        ig_done = true;
                    }
                }
            }
        }
    };
    auto step_cp = [&]() {
        for (int n = 0; n < quantum_cp && !ig_out.empty(); ++n) {
            if (static_cast<int>(cp_out.size()) >= queue_capacity) {
                return;
            }
            SpikeEvent e = ig_out.front();
            ig_out.pop_front();
            cp_out.push_back({e, cp_generation(e, g)});
        }
    };
    auto step_map = [&]() {
        for (int n = 0; n < quantum_map && !cp_out.empty(); ++n) {
            diffuse_one(cp_out.front().event, grid, g);
            cp_out.pop_front();
        }
    };

    while (!ig_done || !ig_out.empty() || !cp_out.empty()) {
        // Drain downstream first so bounded queues always make progress.
        step_map();
        step_cp();
        step_ig();
    }
    return grid;
}

} // namespace spikesim
