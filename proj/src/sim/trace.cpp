#include "ccopt/sim/trace.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ccopt/rng.hpp"

namespace ccopt::sim {

using json = nlohmann::json;

namespace {
constexpr double kPacketBits = 1500.0 * 8.0;
}

double Trace::avg_bandwidth_mbps() const {
    if (duration_ms <= 0) return 0.0;
    double bits = static_cast<double>(deliveries_ms.size()) * kPacketBits;
    return bits / (static_cast<double>(duration_ms) * 1e-3) / 1e6;
}

std::vector<double> Trace::bandwidth_series(int64_t interval_ms) const {
    if (duration_ms <= 0 || interval_ms <= 0) return {};
    size_t bins = static_cast<size_t>((duration_ms + interval_ms - 1) / interval_ms);
    std::vector<double> out(bins, 0.0);
    for (int64_t t : deliveries_ms) {
        size_t bin = static_cast<size_t>(std::min<int64_t>(t / interval_ms,
                                                           static_cast<int64_t>(bins) - 1));
        out[bin] += 1.0;
    }
    for (double& v : out) v = v * kPacketBits / (static_cast<double>(interval_ms) * 1e-3) / 1e6;
    return out;
}

Trace Trace::scaled_down(int factor) const {
    Trace out;
    out.duration_ms = duration_ms;
    for (size_t i = 0; i < deliveries_ms.size(); i += static_cast<size_t>(factor))
        out.deliveries_ms.push_back(deliveries_ms[i]);
    return out;
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace: " + path.string());
    Trace trace;
    std::string line;
    int lineno = 0;
    int64_t prev = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int64_t value = 0;
        try {
            size_t consumed = 0;
            value = std::stoll(line, &consumed);
            if (consumed != line.size()) throw std::invalid_argument("trailing chars");
        } catch (const std::exception&) {
            throw TraceError("non-integer at line " + std::to_string(lineno));
        }
        if (value < 0) throw TraceError("negative timestamp at line " + std::to_string(lineno));
        if (value < prev) throw TraceError("non-monotonic at line " + std::to_string(lineno));
        prev = value;
        trace.deliveries_ms.push_back(value);
    }
    if (trace.deliveries_ms.empty()) throw TraceError("empty trace: " + path.string());
    trace.duration_ms = trace.deliveries_ms.back() + 1;
    return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot write trace: " + path.string());
    for (int64_t t : trace.deliveries_ms) out << t << '\n';
}

Trace make_constant_trace(double mbps, int64_t duration_ms) {
    Trace trace;
    trace.duration_ms = duration_ms;
    double interval_ms = kPacketBits / (mbps * 1e6) * 1e3;  // ms per packet
    double t = 0.0;
    while (t < static_cast<double>(duration_ms)) {
        trace.deliveries_ms.push_back(static_cast<int64_t>(t));
        t += interval_ms;
    }
    return trace;
}

Trace make_square_wave_trace(double low_mbps, double high_mbps, int64_t period_ms,
                             int64_t duration_ms) {
    Trace trace;
    trace.duration_ms = duration_ms;
    double t = 0.0;
    while (t < static_cast<double>(duration_ms)) {
        int64_t phase = static_cast<int64_t>(t) / period_ms;
        double mbps = (phase % 2 == 0) ? high_mbps : low_mbps;
        trace.deliveries_ms.push_back(static_cast<int64_t>(t));
        t += kPacketBits / (mbps * 1e6) * 1e3;
    }
    return trace;
}

Trace make_random_walk_trace(double start_mbps, double min_mbps, double max_mbps,
                             double step_mbps, int64_t duration_ms, uint64_t seed) {
    Trace trace;
    trace.duration_ms = duration_ms;
    Rng rng(seed);
    double rate = start_mbps;
    double t = 0.0;
    double next_step = 0.0;
    while (t < static_cast<double>(duration_ms)) {
        if (t >= next_step) {  // re-draw the rate every 200 ms
            rate += (rng.uniform() * 2.0 - 1.0) * step_mbps;
            rate = std::clamp(rate, min_mbps, max_mbps);
            next_step = t + 200.0;
        }
        trace.deliveries_ms.push_back(static_cast<int64_t>(t));
        t += kPacketBits / (rate * 1e6) * 1e3;
    }
    return trace;
}

const char* to_string(DatasetTag t) {
    switch (t) {
        case DatasetTag::FCC: return "FCC";
        case DatasetTag::Starlink: return "Starlink";
        case DatasetTag::FourG: return "4G";
        case DatasetTag::FiveG: return "5G";
        case DatasetTag::Synthetic: return "Synthetic";
    }
    return "?";
}

std::vector<NetworkCondition> build_condition_grid(const std::vector<TraceSpec>& traces,
                                                   double rtt_ms) {
    std::vector<NetworkCondition> grid;
    for (const TraceSpec& spec : traces) {
        Trace effective =
            spec.tag == DatasetTag::Starlink ? spec.trace.scaled_down(8) : spec.trace;
        double bdp_bytes = effective.avg_bandwidth_mbps() * 1e6 / 8.0 * (rtt_ms * 1e-3);
        for (double mult : {1.0, 0.5}) {
            NetworkCondition c;
            c.id = spec.name + (mult == 1.0 ? "/q1.0" : "/q0.5");
            c.trace = effective;
            c.rtt_ms = rtt_ms;
            c.queue_bytes = std::max<int64_t>(1500, static_cast<int64_t>(bdp_bytes * mult));
            c.tag = spec.tag;
            grid.push_back(std::move(c));
        }
    }
    return grid;
}

std::string grid_manifest_json(const std::vector<NetworkCondition>& grid,
                               const std::vector<std::string>& trace_paths) {
    json arr = json::array();
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto& c = grid[i];
        arr.push_back({{"id", c.id},
                       {"trace_path", i < trace_paths.size() ? trace_paths[i] : ""},
                       {"rtt_ms", c.rtt_ms},
                       {"queue_bytes", c.queue_bytes},
                       {"dataset_tag", to_string(c.tag)}});
    }
    return arr.dump(2);
}

}  // namespace ccopt::sim
