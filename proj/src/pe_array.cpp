#include "spikesim/pe_array.hpp"

namespace spikesim {

void CycleStats::add(const CycleStats &o)
{
    total_cycles += o.total_cycles;
    compute_cycles += o.compute_cycles;
    stall_wfifo += o.stall_wfifo;
    stall_sfifo += o.stall_sfifo;
    stall_both += o.stall_both;
    stall_contention += o.stall_contention;
    idle_drained += o.idle_drained;
    producer_backpressure_cycles += o.producer_backpressure_cycles;
    sdu_fifo_stalls += o.sdu_fifo_stalls;
    events_consumed += o.events_consumed;
    residual_events += o.residual_events;
    windows_dispatched += o.windows_dispatched;
    spikes_emitted += o.spikes_emitted;
    buffer_writes += o.buffer_writes;
    lif_saturations += o.lif_saturations;
    fifo_pushes += o.fifo_pushes;
    fifo_pops += o.fifo_pops;
}

DispatchDecision dispatch(const WindowTask &task, bool weights_available,
        bool window_available, const EpaConfig &cfg)
{
    DispatchDecision d;
    if (weights_available && window_available) {
        d.fire = true;
        d.busy_cycles = task.vld_cnt + (task.residual ? 1 : 0) + cfg.overhead_cycles;
        return d;
    }
    if (!weights_available && !window_available) {
        d.cause = StallCause::BothEmpty;
    } else if (!weights_available) {
        d.cause = StallCause::WeightFifoEmpty;
    } else {
        d.cause = StallCause::SpikeFifoEmpty;
    }
    return d;
}

void pe_consume_event(PeState &pe, const EventFifoEntry &entry, const FixedTensor &weights)
{
    pe.membrane_acc += weights.at4(pe.oc, entry.tap.ic, entry.tap.ki, entry.tap.kj);
}

double layer_latency(const CycleStats &stats, const EpaConfig &cfg)
{
    SPIKESIM_REQUIRE(cfg.clock_hz > 0, "clock must be positive");
    return static_cast<double>(stats.total_cycles) / cfg.clock_hz;
}

EvLayerResult run_layer_eventdriven(const ConvLayerDesc &layer, const SpikeTensor &input,
        const EpaConfig &cfg, const WritebackFilter &filter)
{
    SPIKESIM_REQUIRE(layer.weights != nullptr, "layer has no weights");
    SPIKESIM_REQUIRE(cfg.valid(), "invalid EPA configuration");
    const ConvGeometry &g = layer.geom;
    SPIKESIM_REQUIRE(g.valid(), "invalid conv geometry");
    SPIKESIM_REQUIRE(g.in_channels == input.channels && g.in_h == input.height &&
                    g.in_w == input.width,
            "input does not match the layer geometry");

    int oc_count = layer.weights->dim(0);
    int oh = g.out_h();
    int ow = g.out_w();
    if (layer.residual != nullptr) {
        SPIKESIM_REQUIRE(layer.residual->channels == oc_count &&
                        layer.residual->height == oh && layer.residual->width == ow,
                "residual endpoints must have identical shapes");
    }

    EvLayerResult result;
    result.output = SpikeTensor(oc_count, oh, ow);
    CycleStats &stats = result.stats;

    // Stage 1: sparse detection populates per-output event windows.
    SduGrid grid = build_sdu_grid(input, g, cfg.sdu_fifo_capacity);
    stats.sdu_fifo_stalls = grid.backpressure_stalls();

    // A task per output neuron with anything to integrate. Silent windows are
    // skipped entirely: no dispatch, no cycles, no events.
    std::vector<WindowTask> tasks;
    for (int oc = 0; oc < oc_count; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                auto [vld, entries] = read_window(grid, oy, ox);
                bool residual =
                        layer.residual != nullptr && layer.residual->get(oc, oy, ox);
                if (vld > 0 || residual) {
                    tasks.push_back({oc, oy, ox, vld, residual});
                }
            }
        }
    }

    if (tasks.empty()) {
        return result; // event-driven silence: zero cycles
    }

    const int pe_count = cfg.pe_count();
    std::vector<PeState> pes(pe_count);
    std::vector<StallCause> cause(pe_count, StallCause::None);
    std::vector<uint8_t> worked(pe_count, 0);

    // Both elastic FIFOs carry task-granular tokens in task order, so their
    // heads always describe the same pending window.
    ElasticFifo<int> w_fifo(cfg.w_fifo_capacity);
    ElasticFifo<int> s_fifo(cfg.s_fifo_capacity);
    size_t produced_w = 0;
    size_t produced_s = 0;
    size_t next_task = 0;
    size_t completed = 0;
    int rr_cursor = 0;
    int one_raw = layer.weights->format.one_raw();

    auto finalize = [&](PeState &pe) {
        LifState state;
        LifStepResult r = lif_step(state, layer.lif, pe.membrane_acc);
        stats.lif_saturations += state.saturations;
        stats.spikes_emitted += r.spike ? 1 : 0;
        bool bit = r.spike;
        if (filter) {
            bit = filter(pe.oc, pe.oy, pe.ox, r.spike);
        }
        result.output.set(pe.oc, pe.oy, pe.ox, bit);
        stats.buffer_writes++;
        completed++;
    };

    int64_t cycle = 0;
    while (completed < tasks.size()) {
        SPIKESIM_REQUIRE(cycle < cfg.max_cycles, "EPA simulation exceeded the cycle limit");

        // Producers: WMU streams weight tokens, PipeSDA streams windows.
        if (cycle >= cfg.wmu_latency) {
            if (produced_w < tasks.size() && w_fifo.full()) {
                stats.producer_backpressure_cycles++;
            }
            for (int n = 0; n < cfg.weights_per_cycle && produced_w < tasks.size(); ++n) {
                if (!w_fifo.try_push(static_cast<int>(produced_w))) {
                    break;
                }
                produced_w++;
            }
        }
        if (produced_s < tasks.size() && s_fifo.full()) {
            stats.producer_backpressure_cycles++;
        }
        for (int n = 0; n < cfg.windows_per_cycle && produced_s < tasks.size(); ++n) {
            if (!s_fifo.try_push(static_cast<int>(produced_s))) {
                break;
            }
            produced_s++;
        }

        // Dispatch: idle PEs take the next pending window, round-robin.
        int budget = cfg.dispatches_per_cycle;
        for (int k = 0; k < pe_count; ++k) {
            int idx = (rr_cursor + k) % pe_count;
            PeState &pe = pes[idx];
            if (!pe.idle()) {
                cause[idx] = StallCause::None;
                continue;
            }
            if (next_task >= tasks.size()) {
                cause[idx] = StallCause::Drained;
                continue;
            }
            if (budget == 0) {
                cause[idx] = StallCause::DispatchContention;
                continue;
            }
            const WindowTask &task = tasks[next_task];
            DispatchDecision d = dispatch(task, !w_fifo.empty(), !s_fifo.empty(), cfg);
            if (!d.fire) {
                cause[idx] = d.cause;
                continue;
            }
            w_fifo.pop();
            s_fifo.pop();
            auto [vld, entries] = read_window(grid, task.oy, task.ox);
            pe.window = entries;
            pe.vld_cnt = vld;
            pe.event_cursor = 0;
            pe.residual_pending = task.residual;
            pe.membrane_acc = 0;
            pe.oc = task.oc;
            pe.oy = task.oy;
            pe.ox = task.ox;
            pe.busy = d.busy_cycles;
            cause[idx] = StallCause::None;
            stats.windows_dispatched++;
            next_task++;
            budget--;
        }

        // Work: one event (or overhead slot) per busy PE per cycle.
        for (int idx = 0; idx < pe_count; ++idx) {
            PeState &pe = pes[idx];
            worked[idx] = pe.busy > 0;
            if (pe.busy == 0) {
                continue;
            }
            if (pe.event_cursor < pe.vld_cnt) {
                const EventFifoEntry &e = pe.window[pe.event_cursor++];
                pe.membrane_acc += layer.weights->at4(pe.oc, e.tap.ic, e.tap.ki, e.tap.kj);
                stats.events_consumed++;
            } else if (pe.residual_pending) {
                pe.membrane_acc += one_raw;
                pe.residual_pending = false;
                stats.events_consumed++;
                stats.residual_events++;
            }
            pe.busy--;
            if (pe.busy == 0) {
                finalize(pe);
            }
        }

        // Accounting: every PE-cycle lands in exactly one bucket.
        for (int idx = 0; idx < pe_count; ++idx) {
            if (worked[idx]) {
                stats.compute_cycles++;
                continue;
            }
            switch (cause[idx]) {
            case StallCause::WeightFifoEmpty: stats.stall_wfifo++; break;
            case StallCause::SpikeFifoEmpty: stats.stall_sfifo++; break;
            case StallCause::BothEmpty: stats.stall_both++; break;
            case StallCause::DispatchContention: stats.stall_contention++; break;
            case StallCause::Drained:
            case StallCause::None: stats.idle_drained++; break;
            }
        }
        rr_cursor = (rr_cursor + 1) % pe_count;
        cycle++;
    }

    stats.total_cycles = cycle;
    stats.fifo_pushes = w_fifo.pushes() + s_fifo.pushes();
    stats.fifo_pops = w_fifo.pops() + s_fifo.pops();
    return result;
}

QkBlockRunResult run_qk_block_eventdriven(const SpikeTensor &x, const QkBlockSpec &spec,
        const EpaConfig &cfg)
{
    QkBlockRunResult r;
    int tokens = x.height * x.width;
    AttenReg reg(spec.mask_axis, x.channels, tokens);

    ConvGeometry g{x.channels, x.height, x.width, 1, 1, 0};

    // Q pass: the attention register is filled during Q's own write-back.
    ConvLayerDesc q_desc{&spec.q_weights, g, spec.q_lif, nullptr};
    EvLayerResult q = run_layer_eventdriven(q_desc, x, cfg,
            [&](int oc, int oy, int ox, bool spike) {
                reg.record_q(oc, oy * x.width + ox, spike);
                return spike;
            });
    r.q_spikes = std::move(q.output);
    r.q_stats = q.stats;
    reg.close_q_all();

    // K pass: the mask is applied as K is written back. The pre-mask spikes
    // are recorded for trace parity with the functional oracle.
    r.k_spikes = SpikeTensor(x.channels, x.height, x.width);
    ConvLayerDesc k_desc{&spec.k_weights, g, spec.k_lif, spec.residual ? &x : nullptr};
    EvLayerResult k = run_layer_eventdriven(k_desc, x, cfg,
            [&](int oc, int oy, int ox, bool spike) {
                r.k_spikes.set(oc, oy, ox, spike);
                return reg.apply_k(oc, oy * x.width + ox, spike);
            });
    r.output = std::move(k.output);
    r.k_stats = k.stats;
    return r;
}

} // namespace spikesim
