#include "spikesim/engine.hpp"

#include <fstream>
#include <thread>

#include <json.hpp>

#include "spikesim/ttfs.hpp"

namespace spikesim {

RunMode parse_run_mode(const std::string &s)
{
    if (s == "reference") {
        return RunMode::Reference;
    }
    if (s == "eventdriven") {
        return RunMode::EventDriven;
    }
    if (s == "compare") {
        return RunMode::Compare;
    }
    throw ConfigError("unknown run mode '" + s + "'");
}

SimConfig load_sim_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    SimConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string &key = it.key();
        try {
            if (key == "pe_rows") {
                cfg.epa.pe_rows = it->get<int>();
            } else if (key == "pe_cols") {
                cfg.epa.pe_cols = it->get<int>();
            } else if (key == "w_fifo_capacity") {
                cfg.epa.w_fifo_capacity = it->get<int>();
            } else if (key == "s_fifo_capacity") {
                cfg.epa.s_fifo_capacity = it->get<int>();
            } else if (key == "sdu_fifo_capacity") {
                cfg.epa.sdu_fifo_capacity = it->get<int>();
            } else if (key == "overhead_cycles") {
                cfg.epa.overhead_cycles = it->get<int>();
            } else if (key == "clock_hz") {
                cfg.epa.clock_hz = it->get<double>();
            } else if (key == "windows_per_cycle") {
                cfg.epa.windows_per_cycle = it->get<int>();
            } else if (key == "weights_per_cycle") {
                cfg.epa.weights_per_cycle = it->get<int>();
            } else if (key == "wmu_latency") {
                cfg.epa.wmu_latency = it->get<int>();
            } else if (key == "dispatches_per_cycle") {
                cfg.epa.dispatches_per_cycle = it->get<int>();
            } else if (key == "power_w") {
                cfg.metrics.power_w = it->get<double>();
            } else if (key == "kluts") {
                cfg.metrics.kluts = it->get<double>();
            } else if (key == "workers") {
                cfg.workers = it->get<int>();
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError("bad value for config key '" + key + "': " + e.what());
        }
    }
    if (!cfg.valid()) {
        throw ConfigError("config values out of range");
    }
    if (cfg.metrics.power_w <= 0 || cfg.metrics.kluts <= 0) {
        throw ConfigError("power and kLUTs must be positive");
    }
    return cfg;
}

std::vector<ExecGroup> build_exec_groups(const ModelGraph &model)
{
    SPIKESIM_REQUIRE(model.validated, "model must be validated");
    std::vector<ExecGroup> groups;
    int n = static_cast<int>(model.layers.size());
    int i = 0;
    auto kind_at = [&](int k) {
        return k < n ? std::optional<LayerKind>(model.layers[k].kind) : std::nullopt;
    };
    while (i < n) {
        switch (model.layers[i].kind) {
        case LayerKind::Conv: {
            ExecGroup g;
            g.kind = GroupKind::EpaConv;
            g.first = i;
            g.conv = i;
            int j = i + 1;
            if (kind_at(j) == LayerKind::ResidualAdd) {
                g.residual = j;
                j++;
            }
            if (kind_at(j) != LayerKind::Lif) {
                throw LoadError("layer " + std::to_string(i) +
                        ": conv must feed a lif for event-driven execution");
            }
            g.lif = j;
            g.last = j;
            groups.push_back(g);
            i = j + 1;
            break;
        }
        case LayerKind::QkformerBlock:
            groups.push_back({GroupKind::QkBlock, i, i, -1, -1, -1});
            i++;
            break;
        case LayerKind::AvgPool: {
            if (kind_at(i + 1) == LayerKind::Lif) {
                groups.push_back({GroupKind::PoolLif, i, i + 1, -1, -1, i + 1});
            } else if (kind_at(i + 1) == LayerKind::FullyConnected) {
                groups.push_back({GroupKind::PoolFc, i, i + 1, -1, -1, -1});
            } else {
                throw LoadError("layer " + std::to_string(i) +
                        ": avg_pool must feed a lif or the classifier");
            }
            i += 2;
            break;
        }
        case LayerKind::W2ttfsPool: {
            if (kind_at(i + 1) != LayerKind::FullyConnected) {
                throw LoadError("layer " + std::to_string(i) +
                        ": w2ttfs_pool must feed the classifier");
            }
            groups.push_back({GroupKind::Wtfc, i, i + 1, -1, -1, -1});
            i += 2;
            break;
        }
        case LayerKind::FullyConnected:
            groups.push_back({GroupKind::DirectFc, i, i, -1, -1, -1});
            i++;
            break;
        case LayerKind::Lif:
        case LayerKind::ResidualAdd:
            throw LoadError("layer " + std::to_string(i) +
                    ": dangling " + layer_kind_name(model.layers[i].kind));
        }
    }
    return groups;
}

int64_t EventRunResult::events_total() const
{
    int64_t v = 0;
    for (const LayerRow &r : rows) {
        v += r.events;
    }
    return v;
}

int64_t EventRunResult::synops_total() const
{
    int64_t v = 0;
    for (const LayerRow &r : rows) {
        v += r.synops;
    }
    return v;
}

int64_t EventRunResult::spikes_total() const
{
    int64_t v = 0;
    for (const LayerRow &r : rows) {
        v += r.spikes;
    }
    return v;
}

namespace {

// Consumed events must match the dense-formula incidence count exactly:
// every (spike, real output) pair once per output channel, plus one unit
// event per shortcut spike.
bool conservation_holds(const CycleStats &stats, const SpikeTensor &input,
        const ConvGeometry &g, int out_channels, const SpikeTensor *residual)
{
    int64_t expected = conv_incidence_count(input, g.kernel, g.stride, g.padding) * out_channels;
    int64_t expected_residual = residual != nullptr ? residual->total_spikes() : 0;
    if (stats.events_consumed - stats.residual_events != expected) {
        return false;
    }
    if (stats.residual_events != expected_residual) {
        return false;
    }
    // Elastic FIFOs drained and lossless at quiescence.
    return stats.fifo_pushes == stats.fifo_pops;
}

} // namespace

EventRunResult run_eventdriven(const ModelGraph &model, const SpikeTensor &input,
        const EpaConfig &cfg)
{
    SPIKESIM_REQUIRE(cfg.valid(), "invalid EPA configuration");
    std::vector<ExecGroup> groups = build_exec_groups(model);

    EventRunResult result;
    int n = static_cast<int>(model.layers.size());
    result.rows.assign(n, {});
    result.spikes.assign(n, std::nullopt);

    int one_raw = model.format.one_raw();
    SpikeTensor cur = input;           // current spike-valued activation
    PooledTensor pooled;               // current pooled value (PoolLif/PoolFc)
    ScoreVector scores;
    Shape3 shape = model.input;

    for (const ExecGroup &g : groups) {
        switch (g.kind) {
        case GroupKind::EpaConv: {
            const LayerSpec &conv = model.layers[g.conv];
            const SpikeTensor *residual = nullptr;
            if (g.residual >= 0) {
                int from = model.layers[g.residual].residual_from;
                residual = from < 0 ? &input : &result.spikes[from].value();
            }
            ConvLayerDesc desc{&conv.weights,
                    ConvGeometry{shape.c, shape.h, shape.w, conv.kernel, conv.stride,
                            conv.padding},
                    model.layers[g.lif].lif, residual};
            EvLayerResult r = run_layer_eventdriven(desc, cur, cfg);
            if (!conservation_holds(r.stats, cur, desc.geom, conv.out_channels, residual)) {
                result.conservation_ok = false;
            }
            result.rows[g.conv].events = r.stats.events_consumed - r.stats.residual_events;
            result.rows[g.conv].synops = result.rows[g.conv].events;
            result.rows[g.conv].cycles = r.stats.total_cycles;
            if (g.residual >= 0) {
                result.rows[g.residual].events = r.stats.residual_events;
                result.rows[g.residual].synops = r.stats.residual_events;
            }
            result.rows[g.lif].spikes = r.stats.spikes_emitted;
            result.lif_saturations += r.stats.lif_saturations;
            result.epa_totals.add(r.stats);
            result.pass_stats.push_back(r.stats);
            cur = std::move(r.output);
            result.spikes[g.lif] = cur;
            shape = model.output_of(g.lif).shape;
            break;
        }
        case GroupKind::QkBlock: {
            const LayerSpec &l = model.layers[g.first];
            QkBlockRunResult r = run_qk_block_eventdriven(cur, l.qk, cfg);
            ConvGeometry g1{shape.c, shape.h, shape.w, 1, 1, 0};
            if (!conservation_holds(r.q_stats, cur, g1, l.qk.q_weights.dim(0), nullptr) ||
                    !conservation_holds(r.k_stats, cur, g1, l.qk.k_weights.dim(0),
                            l.qk.residual ? &cur : nullptr)) {
                result.conservation_ok = false;
            }
            LayerRow &row = result.rows[g.first];
            row.events = r.q_stats.events_consumed + r.k_stats.events_consumed;
            row.synops = row.events;
            row.cycles = r.q_stats.total_cycles + r.k_stats.total_cycles;
            row.spikes = r.q_stats.spikes_emitted + r.k_stats.spikes_emitted;
            result.lif_saturations += r.q_stats.lif_saturations + r.k_stats.lif_saturations;
            result.epa_totals.add(r.q_stats);
            result.epa_totals.add(r.k_stats);
            result.pass_stats.push_back(r.q_stats);
            result.pass_stats.push_back(r.k_stats);
            cur = std::move(r.output);
            result.spikes[g.first] = cur;
            break;
        }
        case GroupKind::PoolLif: {
            const LayerSpec &pool = model.layers[g.first];
            result.rows[g.first].events = cur.total_spikes();
            result.rows[g.first].synops = result.rows[g.first].events;
            pooled = avg_pool_ref(cur, pool.window);
            cur = lif_over_pooled(pooled, model.layers[g.lif].lif, one_raw);
            result.rows[g.lif].spikes = cur.total_spikes();
            result.spikes[g.lif] = cur;
            shape = model.output_of(g.lif).shape;
            break;
        }
        case GroupKind::PoolFc: {
            const LayerSpec &pool = model.layers[g.first];
            const LayerSpec &fc = model.layers[g.last];
            result.rows[g.first].events = cur.total_spikes();
            result.rows[g.first].synops = result.rows[g.first].events;
            pooled = avg_pool_ref(cur, pool.window);
            int64_t nonzero = 0;
            for (int32_t c : pooled.counts) {
                nonzero += c != 0;
            }
            result.rows[g.last].events = nonzero * fc.classes;
            result.rows[g.last].synops = result.rows[g.last].events;
            scores = fc_exact_pooled(pooled, fc.weights);
            break;
        }
        case GroupKind::Wtfc: {
            const LayerSpec &pool = model.layers[g.first];
            const LayerSpec &fc = model.layers[g.last];
            std::vector<TtfsTuple> tuples = ttfs_filter(cur, pool.window);
            result.rows[g.first].events = cur.total_spikes();
            result.rows[g.first].synops = result.rows[g.first].events;
            const LayerIo &pool_io = model.output_of(g.first);
            FcuState fcu = FcuState::make(fc.classes, pool.window * pool.window,
                    pool_io.shape.h * pool_io.shape.w);
            for (const TtfsTuple &t : tuples) {
                fcu_accumulate(fcu, t, fc.weights);
            }
            result.rows[g.last].events = fcu.ops.adds;
            result.rows[g.last].synops = fcu.ops.adds;
            result.wtfc_add_cycles += fcu.add_cycles;
            result.rows[g.last].cycles = fcu.add_cycles;
            result.fcu_bound = fcu_truncation_bound(tuples);
            result.fcu_shift_path = fcu.shift_path;
            scores = fcu_scores(fcu);
            break;
        }
        case GroupKind::DirectFc: {
            const LayerSpec &fc = model.layers[g.first];
            result.rows[g.first].events = cur.total_spikes() * fc.classes;
            result.rows[g.first].synops = result.rows[g.first].events;
            scores = fc_exact_spikes(cur, fc.weights);
            break;
        }
        }
    }

    result.scores = std::move(scores);
    return result;
}

namespace {

struct ImageOutcome {
    std::optional<ReferenceResult> ref;
    std::optional<EventRunResult> ev;
    int predicted = 0;
    int ref_predicted = 0;
    int64_t cycles = 0;
    bool spikes_identical = true;
    bool scores_identical = true;
    bool scores_within_bound = true;
    bool argmax_equal = true;
    bool synops_equal = true;
    bool fifo_no_loss = true;
    bool event_conservation = true;
    bool stats_additive = true;

    bool all_exact() const
    {
        return spikes_identical && scores_identical && argmax_equal && synops_equal &&
                fifo_no_loss && event_conservation && stats_additive;
    }
    bool acceptable() const
    {
        return spikes_identical && scores_within_bound && argmax_equal && synops_equal &&
                fifo_no_loss && event_conservation && stats_additive;
    }
};

bool scores_equal(const ScoreVector &a, const ScoreVector &b)
{
    if (a.num.size() != b.num.size()) {
        return false;
    }
    for (size_t j = 0; j < a.num.size(); ++j) {
        if (a.num[j] * b.den != b.num[j] * a.den) {
            return false;
        }
    }
    return true;
}

// |ev - ref| <= bound, with ev over den 1 and ref over den d:
// |ev*d - ref_num| <= bound*d per class.
bool scores_within(const ScoreVector &ev, const ScoreVector &ref, int64_t bound)
{
    if (ev.num.size() != ref.num.size() || ev.den != 1) {
        return false;
    }
    for (size_t j = 0; j < ev.num.size(); ++j) {
        int64_t diff = ev.num[j] * ref.den - ref.num[j];
        if (diff < 0) {
            diff = -diff;
        }
        if (diff > bound * ref.den) {
            return false;
        }
    }
    return true;
}

void compare_image(ImageOutcome &o)
{
    const ReferenceResult &ref = *o.ref;
    const EventRunResult &ev = *o.ev;

    for (size_t i = 0; i < ev.spikes.size(); ++i) {
        if (!ev.spikes[i].has_value()) {
            continue;
        }
        if (!ref.trace[i].spikes.has_value() ||
                !(*ref.trace[i].spikes == *ev.spikes[i])) {
            o.spikes_identical = false;
        }
    }

    o.scores_identical = scores_equal(ev.scores, ref.scores);
    o.scores_within_bound = o.scores_identical ||
            (ev.fcu_shift_path && scores_within(ev.scores, ref.scores, ev.fcu_bound));
    o.argmax_equal = ev.scores.argmax() == ref.scores.argmax();
    o.synops_equal = count_synops(ref.trace) == ev.synops_total();
    o.event_conservation = ev.conservation_ok;

    int64_t pass_cycles = 0;
    for (const CycleStats &s : ev.pass_stats) {
        if (s.fifo_pushes != s.fifo_pops) {
            o.fifo_no_loss = false;
        }
        pass_cycles += s.total_cycles;
    }
    int64_t row_cycles = 0;
    for (const LayerRow &r : ev.rows) {
        row_cycles += r.cycles;
    }
    o.stats_additive = pass_cycles == ev.epa_totals.total_cycles &&
            row_cycles == ev.total_cycles();
}

ImageOutcome process_image(RunMode mode, const ModelGraph &model, const SpikeTensor &img,
        const EpaConfig &epa)
{
    ImageOutcome o;
    if (mode == RunMode::Reference || mode == RunMode::Compare) {
        o.ref = run_reference(model, img);
        o.ref_predicted = o.ref->scores.argmax();
        o.predicted = o.ref_predicted;
    }
    if (mode == RunMode::EventDriven || mode == RunMode::Compare) {
        o.ev = run_eventdriven(model, img, epa);
        o.predicted = o.ev->scores.argmax();
        o.cycles = o.ev->total_cycles();
    }
    if (mode == RunMode::Compare) {
        compare_image(o);
    }
    return o;
}

const char *mode_name(RunMode mode)
{
    switch (mode) {
    case RunMode::Reference: return "reference";
    case RunMode::EventDriven: return "eventdriven";
    case RunMode::Compare: return "compare";
    }
    return "?";
}

} // namespace

RunReport run_model(RunMode mode, const RunInputs &in, const SimConfig &cfg)
{
    SPIKESIM_REQUIRE(in.model != nullptr && in.inputs != nullptr, "missing model or inputs");
    if (!cfg.valid()) {
        throw ConfigError("invalid simulator configuration");
    }
    const ModelGraph &model = *in.model;
    const InputBundle &inputs = *in.inputs;
    SPIKESIM_REQUIRE(model.validated, "model must be validated");
    if (!(inputs.shape == model.input)) {
        throw LoadError("input bundle shape does not match the model input");
    }
    // Validate the event-driven grouping up front so configuration problems
    // surface before any worker starts.
    if (mode != RunMode::Reference) {
        build_exec_groups(model);
    }

    int count = static_cast<int>(inputs.images.size());
    std::vector<ImageOutcome> outcomes(count);

    int workers = std::min(cfg.workers, std::max(count, 1));
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) {
            outcomes[i] = process_image(mode, model, inputs.images[i], cfg.epa);
        }
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (int i = w; i < count; i += workers) {
                        outcomes[i] = process_image(mode, model, inputs.images[i], cfg.epa);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
        for (auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    // Merge per-image results in input order.
    RunReport report;
    report.mode = mode_name(mode);
    report.model_path = in.model_path;
    report.input_path = in.input_path;
    report.input_shape = model.input;
    report.image_count = count;
    report.layer_count = static_cast<int>(model.layers.size());

    std::vector<LayerReportRow> rows(model.layers.size());
    for (size_t l = 0; l < model.layers.size(); ++l) {
        rows[l].index = static_cast<int>(l);
        rows[l].kind = layer_kind_name(model.layers[l].kind);
    }

    int64_t total_spikes = 0;
    int64_t input_spikes = 0;
    int64_t synops = 0;
    int64_t total_cycles = 0;
    int hits = 0;
    bool all_exact = true;
    bool all_acceptable = true;

    for (int i = 0; i < count; ++i) {
        const ImageOutcome &o = outcomes[i];
        input_spikes += inputs.images[i].total_spikes();
        if (o.ev.has_value()) {
            for (size_t l = 0; l < model.layers.size(); ++l) {
                rows[l].spikes += o.ev->rows[l].spikes;
                rows[l].synops += o.ev->rows[l].synops;
                rows[l].events += o.ev->rows[l].events;
                rows[l].cycles += o.ev->rows[l].cycles;
            }
            total_spikes += o.ev->spikes_total();
            synops += o.ev->synops_total();
            total_cycles += o.ev->total_cycles();
        } else {
            for (size_t l = 0; l < model.layers.size(); ++l) {
                rows[l].spikes += o.ref->trace[l].spikes_emitted;
                rows[l].synops += o.ref->trace[l].synops;
            }
            total_spikes += [&] {
                int64_t s = 0;
                for (const LayerTrace &t : o.ref->trace) {
                    s += t.spikes_emitted;
                }
                return s;
            }();
            synops += count_synops(o.ref->trace);
        }

        ImageReportRow row;
        row.index = i;
        row.predicted = o.predicted;
        row.label = inputs.has_labels() ? inputs.labels[i] : -1;
        row.cycles = o.cycles;
        report.images.push_back(row);
        if (inputs.has_labels() && inputs.labels[i] == o.predicted) {
            hits++;
        }
        all_exact = all_exact && o.all_exact();
        all_acceptable = all_acceptable && o.acceptable();
    }

    report.layers = std::move(rows);
    report.accuracy_hits = inputs.has_labels() ? hits : -1;
    report.metrics = finalize_metrics(total_spikes, input_spikes, synops, total_cycles,
            cfg.epa.clock_hz, cfg.metrics);
    if (count > 1 && report.metrics.latency_s > 0) {
        report.metrics.fps = count / report.metrics.latency_s;
    }

    if (mode == RunMode::Compare) {
        report.checks.ran = true;
        report.checks.spikes_identical = true;
        report.checks.scores_identical = true;
        report.checks.scores_within_bound = true;
        report.checks.argmax_equal = true;
        report.checks.synops_equal = true;
        report.checks.fifo_no_loss = true;
        report.checks.event_conservation = true;
        report.checks.stats_additive = true;
        for (const ImageOutcome &o : outcomes) {
            report.checks.spikes_identical &= o.spikes_identical;
            report.checks.scores_identical &= o.scores_identical;
            report.checks.scores_within_bound &= o.scores_within_bound;
            report.checks.argmax_equal &= o.argmax_equal;
            report.checks.synops_equal &= o.synops_equal;
            report.checks.fifo_no_loss &= o.fifo_no_loss;
            report.checks.event_conservation &= o.event_conservation;
            report.checks.stats_additive &= o.stats_additive;
        }
        if (all_exact) {
            report.verdict = "identical";
        } else if (all_acceptable) {
            report.verdict = "within-bound";
        } else {
            report.verdict = "divergent";
            report.divergence = true;
        }
    }
    return report;
}

int exit_code_for(const RunReport &report)
{
    return report.divergence ? 1 : 0;
}

} // namespace spikesim
