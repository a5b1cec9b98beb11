#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spikesim/container.hpp"
#include "spikesim/fc_core.hpp"
#include "spikesim/metrics.hpp"
#include "spikesim/model.hpp"
#include "spikesim/pe_array.hpp"
#include "spikesim/reference.hpp"

namespace spikesim {

enum class RunMode { Reference, EventDriven, Compare };

RunMode parse_run_mode(const std::string &s); // throws ConfigError

struct SimConfig {
    EpaConfig epa;
    MetricsConfig metrics;
    int workers = 1;
    bool deterministic_output = false; // drops the timestamp line from reports

    bool valid() const { return epa.valid() && workers >= 1; }
};

// Simulator constants from a JSON config file; unknown keys are rejected.
SimConfig load_sim_config(const std::filesystem::path &path);

// How the event-driven engine executes a validated graph: fused groups that
// map onto the hardware blocks (PE array passes, attention block passes, the
// TTFS FC core) plus functional stages with no array involvement.
enum class GroupKind {
    EpaConv, // conv [+ residual join] + lif on the PE array
    QkBlock,
    PoolLif, // avg-pool + lif re-binarization (functional, no array cycles)
    PoolFc,  // avg-pool + exact classifier (functional)
    Wtfc,    // w2ttfs pool + FC core
    DirectFc,
};

struct ExecGroup {
    GroupKind kind = GroupKind::EpaConv;
    int first = 0; // first layer index in the group
    int last = 0;  // last layer index (the group's output layer)
    int conv = -1;
    int residual = -1;
    int lif = -1;
};

// Throws LoadError when the layer chain cannot execute event-driven
// (e.g. a conv not followed by a lif).
std::vector<ExecGroup> build_exec_groups(const ModelGraph &model);

struct LayerRow {
    int64_t spikes = 0;
    int64_t synops = 0;
    int64_t events = 0;
    int64_t cycles = 0;
};

struct EventRunResult {
    ScoreVector scores;
    std::vector<LayerRow> rows;                      // per layer
    std::vector<std::optional<SpikeTensor>> spikes;  // per layer spike output
    CycleStats epa_totals;
    std::vector<CycleStats> pass_stats;              // one per array pass
    int64_t wtfc_add_cycles = 0;
    int64_t fcu_bound = 0;
    bool fcu_shift_path = true;
    bool conservation_ok = true; // consumed events match the dense incidence formula
    int64_t lif_saturations = 0;

    int64_t total_cycles() const { return epa_totals.total_cycles + wtfc_add_cycles; }
    int64_t compute_cycles() const { return epa_totals.compute_cycles + wtfc_add_cycles; }
    int64_t events_total() const;
    int64_t synops_total() const;
    int64_t spikes_total() const;
};

EventRunResult run_eventdriven(const ModelGraph &model, const SpikeTensor &input,
        const EpaConfig &cfg);

struct RunInputs {
    const ModelGraph *model = nullptr;
    const InputBundle *inputs = nullptr;
    std::string model_path;
    std::string input_path;
};

RunReport run_model(RunMode mode, const RunInputs &in, const SimConfig &cfg);

// 0 ok, 1 divergence found in compare mode.
int exit_code_for(const RunReport &report);

} // namespace spikesim
