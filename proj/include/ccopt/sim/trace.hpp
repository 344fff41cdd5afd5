#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccopt::sim {

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// mahimahi-format trace: one non-negative integer millisecond per line; each
// line is one 1500-byte packet delivery opportunity.
struct Trace {
    std::vector<int64_t> deliveries_ms;  // non-decreasing
    int64_t duration_ms = 0;             // >= last timestamp

    double avg_bandwidth_mbps() const;
    // Per-interval bandwidth samples (Mbps), default 100 ms bins.
    std::vector<double> bandwidth_series(int64_t interval_ms = 100) const;
    // Keep every `factor`-th delivery (Starlink one-eighth scaling).
    Trace scaled_down(int factor) const;
};

Trace load_trace(const std::filesystem::path& path);
void write_trace(const Trace& trace, const std::filesystem::path& path);

// Synthetic families; all deterministic under (params, seed).
Trace make_constant_trace(double mbps, int64_t duration_ms);
Trace make_square_wave_trace(double low_mbps, double high_mbps, int64_t period_ms,
                             int64_t duration_ms);
Trace make_random_walk_trace(double start_mbps, double min_mbps, double max_mbps,
                             double step_mbps, int64_t duration_ms, uint64_t seed);

enum class DatasetTag { FCC, Starlink, FourG, FiveG, Synthetic };

const char* to_string(DatasetTag t);

struct NetworkCondition {
    std::string id;
    Trace trace;
    double rtt_ms = 100.0;
    int64_t queue_bytes = 0;
    DatasetTag tag = DatasetTag::Synthetic;
};

struct TraceSpec {
    Trace trace;
    DatasetTag tag;
    std::string name;
};

// Cross product of traces x {1.0, 0.5} BDP queue multipliers at the given
// RTT. Starlink traces are scaled to one-eighth throughput first.
std::vector<NetworkCondition> build_condition_grid(const std::vector<TraceSpec>& traces,
                                                   double rtt_ms = 100.0);

std::string grid_manifest_json(const std::vector<NetworkCondition>& grid,
                               const std::vector<std::string>& trace_paths);

}  // namespace ccopt::sim
