#include "spikesim/metrics.hpp"

#include <cstdio>
#include <ctime>
#include <sstream>

namespace spikesim {

int64_t count_synops(const std::vector<LayerTrace> &trace)
{
    int64_t n = 0;
    for (const LayerTrace &t : trace) {
        n += t.synops;
    }
    return n;
}

double derive_efficiency(double synops, double latency_s, double power_w)
{
    if (latency_s <= 0 || power_w <= 0) {
        throw ConfigError("efficiency needs positive latency and power");
    }
    if (synops < 0) {
        throw ConfigError("negative synops");
    }
    return synops / latency_s / power_w / 1e9;
}

double energy_per_frame(double power_w, double latency_s)
{
    if (power_w < 0 || latency_s < 0) {
        throw ConfigError("negative power or latency");
    }
    return power_w * latency_s;
}

RunMetrics finalize_metrics(int64_t total_spikes, int64_t input_spikes, int64_t synops,
        int64_t total_cycles, double clock_hz, const MetricsConfig &cfg)
{
    if (clock_hz <= 0) {
        throw ConfigError("clock must be positive");
    }
    if (cfg.power_w <= 0 || cfg.kluts <= 0) {
        throw ConfigError("power and kLUTs must be positive");
    }
    RunMetrics m;
    m.total_spikes = total_spikes;
    m.input_spikes = input_spikes;
    m.synops = synops;
    m.total_cycles = total_cycles;
    m.power_w = cfg.power_w;
    m.latency_s = static_cast<double>(total_cycles) / clock_hz;
    m.energy_j = energy_per_frame(cfg.power_w, m.latency_s);
    if (m.latency_s > 0) {
        m.fps = 1.0 / m.latency_s;
        m.gsops_per_watt = derive_efficiency(static_cast<double>(synops), m.latency_s,
                cfg.power_w);
        m.eff_per_klut = m.gsops_per_watt / cfg.kluts;
    }
    return m;
}

std::string format_double(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

namespace {

std::string timestamp_line()
{
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return std::string("generated: ") + buf + "\n";
}

const char *check_str(bool ok)
{
    return ok ? "ok" : "FAIL";
}

} // namespace

std::string RunReport::to_text(bool include_timestamp) const
{
    std::ostringstream out;
    out << "spikesim run report\n";
    if (include_timestamp) {
        out << timestamp_line();
    }
    out << "mode: " << mode << "\n";
    out << "model: " << model_path << "  layers: " << layer_count << "\n";
    out << "input: " << input_path << "  shape: " << input_shape.c << "x" << input_shape.h
        << "x" << input_shape.w << "  images: " << image_count << "\n";
    if (!verdict.empty()) {
        out << "verdict: " << verdict << "\n";
    }
    for (const ImageReportRow &r : images) {
        out << "image " << r.index << ": predicted=" << r.predicted;
        if (r.label >= 0) {
            out << " label=" << r.label << (r.label == r.predicted ? " hit" : " miss");
        }
        if (r.cycles > 0) {
            out << " cycles=" << r.cycles;
        }
        out << "\n";
    }
    if (accuracy_hits >= 0 && image_count > 0) {
        out << "accuracy: " << accuracy_hits << "/" << image_count << " ("
            << format_double(100.0 * accuracy_hits / image_count, 2) << "%)\n";
    }
    if (!layers.empty()) {
        out << "per-layer:\n";
        out << "  idx  kind             spikes      synops      events      cycles\n";
        for (const LayerReportRow &l : layers) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "  %-4d %-16s %-11lld %-11lld %-11lld %lld\n",
                    l.index, l.kind.c_str(), static_cast<long long>(l.spikes),
                    static_cast<long long>(l.synops), static_cast<long long>(l.events),
                    static_cast<long long>(l.cycles));
            out << buf;
        }
    }
    out << "totals:\n";
    out << "  input spikes: " << metrics.input_spikes << "\n";
    out << "  total spikes: " << metrics.total_spikes << "\n";
    out << "  synops: " << metrics.synops << "\n";
    out << "  cycles: " << metrics.total_cycles << "\n";
    out << "  latency: " << format_double(metrics.latency_s * 1e3, 6) << " ms  fps: "
        << format_double(metrics.fps, 4) << "\n";
    out << "  energy: " << format_double(metrics.energy_j * 1e3, 6) << " mJ (power "
        << format_double(metrics.power_w, 3) << " W, modeled)\n";
    out << "  efficiency: " << format_double(metrics.gsops_per_watt, 4)
        << " GSOPS/W  normalized: " << format_double(metrics.eff_per_klut, 4)
        << " GSOPS/W/kLUT\n";
    if (checks.ran) {
        out << "checks: spikes " << check_str(checks.spikes_identical) << "; scores "
            << (checks.scores_identical ? "identical"
                                        : (checks.scores_within_bound ? "within-bound" : "FAIL"))
            << "; argmax " << check_str(checks.argmax_equal) << "; synops "
            << check_str(checks.synops_equal) << "; fifo-no-loss "
            << check_str(checks.fifo_no_loss) << "; event-conservation "
            << check_str(checks.event_conservation) << "; additivity "
            << check_str(checks.stats_additive) << "\n";
    }
    return out.str();
}

std::string RunReport::to_csv() const
{
    std::ostringstream out;
    out << "section,index,kind,spikes,synops,events,cycles\n";
    for (const LayerReportRow &l : layers) {
        out << "layer," << l.index << "," << l.kind << "," << l.spikes << "," << l.synops
            << "," << l.events << "," << l.cycles << "\n";
    }
    for (const ImageReportRow &r : images) {
        out << "image," << r.index << ",predicted=" << r.predicted << ","
            << (r.label >= 0 ? std::to_string(r.label) : "") << ",,," << r.cycles << "\n";
    }
    out << "total,,," << metrics.total_spikes << "," << metrics.synops << ",,"
        << metrics.total_cycles << "\n";
    out << "metric,latency_ms," << format_double(metrics.latency_s * 1e3, 6) << ",,,,\n";
    out << "metric,fps," << format_double(metrics.fps, 4) << ",,,,\n";
    out << "metric,energy_mj," << format_double(metrics.energy_j * 1e3, 6) << ",,,,\n";
    out << "metric,gsops_per_watt," << format_double(metrics.gsops_per_watt, 4) << ",,,,\n";
    out << "metric,eff_per_klut," << format_double(metrics.eff_per_klut, 4) << ",,,,\n";
    if (!verdict.empty()) {
        out << "verdict," << verdict << ",,,,,\n";
    }
    return out.str();
}

} // namespace spikesim
