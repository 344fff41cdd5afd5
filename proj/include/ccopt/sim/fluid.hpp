#pragma once

#include <cstdint>
#include <vector>

#include "ccopt/harness/backend.hpp"
#include "ccopt/sim/bbr.hpp"
#include "ccopt/sim/trace.hpp"
#include "ccopt/utility/utility.hpp"

namespace ccopt::sim {

enum class Workload { BulkDownload, RequestResponse };

struct SimStats {
    // byte conservation counters; exact integers
    uint64_t injected = 0;
    uint64_t delivered = 0;
    uint64_t dropped = 0;
    uint64_t queue_residual = 0;

    double goodput_mbps = 0.0;
    std::vector<double> request_completions_ms;
};

// Tick-based fluid link: sender paced by `cc`, drop-tail queue, deliveries
// at the trace's timestamps (wrapped modulo its duration), acks returned one
// RTT after dequeue. Fully deterministic under (condition, cc, seed).
SimStats simulate(const NetworkCondition& condition, CcModel& cc, int64_t duration_ms,
                  Workload workload, uint64_t seed);

// Measurement protocol: tput = mean of 3 independent 10 s bulk runs,
// lat = median request completion over one 30 s request-response run.
util::Measurement measure(const NetworkCondition& condition, const CcModel& prototype,
                          uint64_t seed);

// Backend over a condition grid; candidate ids are resolved to BbrParams by
// the supplied registry function.
class SimBackend : public harness::EvalBackend {
public:
    using ParamsLookup = BbrParams (*)(const std::string&);

    SimBackend(std::vector<NetworkCondition> grid, uint64_t seed);

    void register_candidate(const std::string& id, BbrParams params);

    harness::BackendCaps caps() const override { return {true, true}; }
    std::optional<util::Measurement> measure(const std::string& candidate_id,
                                             int condition_index) const override;
    util::Measurement baseline(int condition_index) const override;
    int num_conditions() const override { return static_cast<int>(grid_.size()); }

    const std::vector<NetworkCondition>& grid() const { return grid_; }

private:
    std::vector<NetworkCondition> grid_;
    uint64_t seed_;
    std::vector<std::pair<std::string, BbrParams>> registry_;
    mutable std::vector<std::pair<bool, util::Measurement>> baseline_cache_;
};

}  // namespace ccopt::sim
