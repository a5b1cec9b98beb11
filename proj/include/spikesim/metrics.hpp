#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikesim/reference.hpp"
#include "spikesim/value_types.hpp"

namespace spikesim {

// Board-level inputs the simulation cannot derive: measured power and the
// LUT figure used for normalized efficiency.
struct MetricsConfig {
    double power_w = 0.792;
    double kluts = 71.7;
};

struct RunMetrics {
    int64_t total_spikes = 0; // LIF/PE emissions during inference
    int64_t input_spikes = 0; // encoder spikes fed to the first layer
    int64_t synops = 0;       // one weight accumulation per consumed event
    int64_t total_cycles = 0;
    double latency_s = 0;
    double fps = 0;
    double energy_j = 0; // modeled: power * latency
    double power_w = 0;
    double gsops_per_watt = 0;
    double eff_per_klut = 0;
};

// Reference-run SynOps: sum of per-layer fan-out counts. Must agree with the
// event-driven run's consumed-event total on every model/input pair.
int64_t count_synops(const std::vector<LayerTrace> &trace);

// synops / latency / power / 1e9. Nonpositive latency or power is a
// configuration error; zero synops is a legitimate zero.
double derive_efficiency(double synops, double latency_s, double power_w);

double energy_per_frame(double power_w, double latency_s);

RunMetrics finalize_metrics(int64_t total_spikes, int64_t input_spikes, int64_t synops,
        int64_t total_cycles, double clock_hz, const MetricsConfig &cfg);

// ---- report emission ----

struct LayerReportRow {
    int index = 0;
    std::string kind;
    int64_t spikes = 0; // emissions attributed to this layer
    int64_t synops = 0;
    int64_t events = 0; // consumed events (event-driven runs)
    int64_t cycles = 0; // wall cycles (event-driven runs)
};

struct ImageReportRow {
    int index = 0;
    int predicted = 0;
    int label = -1; // -1: unlabeled
    int64_t cycles = 0;
};

struct CompareChecks {
    bool ran = false;
    bool spikes_identical = false;
    bool scores_identical = false;
    bool scores_within_bound = false;
    bool argmax_equal = false;
    bool synops_equal = false;
    bool fifo_no_loss = false;
    bool event_conservation = false;
    bool stats_additive = false;

    bool all_pass() const
    {
        return spikes_identical && scores_within_bound && argmax_equal && synops_equal &&
                fifo_no_loss && event_conservation && stats_additive;
    }
};

struct RunReport {
    std::string mode;
    std::string model_path;
    std::string input_path;
    Shape3 input_shape;
    int image_count = 0;
    int layer_count = 0;
    std::string verdict; // compare mode: identical | within-bound | divergent
    bool divergence = false;
    std::vector<LayerReportRow> layers;
    std::vector<ImageReportRow> images;
    int accuracy_hits = -1; // -1 when the bundle has no labels
    RunMetrics metrics;
    CompareChecks checks;

    std::string to_text(bool include_timestamp) const;
    std::string to_csv() const;
};

// Deterministic, locale-independent float formatting for reports.
std::string format_double(double v, int decimals);

} // namespace spikesim
