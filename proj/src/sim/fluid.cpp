#include "ccopt/sim/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "ccopt/rng.hpp"

namespace ccopt::sim {

namespace {

constexpr uint64_t kPacketBytes = 1500;
constexpr uint64_t kRequestBytes = 512;
constexpr uint64_t kResponseBytes = 4096;

struct QueueChunk {
    uint64_t bytes;
    int64_t enqueue_ms;
};

struct Event {
    uint64_t bytes;
    double rtt_sample_ms;  // only for acks
    bool is_loss;
};

}  // namespace

SimStats simulate(const NetworkCondition& condition, CcModel& cc, int64_t duration_ms,
                  Workload workload, uint64_t seed) {
    if (duration_ms < 1000) throw std::invalid_argument("duration must be >= 1000 ms");
    const Trace& trace = condition.trace;
    const int64_t span = std::max<int64_t>(1, trace.duration_ms);
    const int64_t rtt = std::max<int64_t>(1, static_cast<int64_t>(condition.rtt_ms));
    const int64_t half_rtt = std::max<int64_t>(1, rtt / 2);

    // delivery opportunities per ms of the trace span
    std::vector<uint32_t> per_ms(static_cast<size_t>(span), 0);
    for (int64_t t : trace.deliveries_ms) {
        if (t < span) ++per_ms[static_cast<size_t>(t)];
    }
    const int64_t phase = static_cast<int64_t>(mix_seed(seed, "trace-phase") %
                                               static_cast<uint64_t>(span));

    SimStats stats;
    std::deque<QueueChunk> queue;
    uint64_t queue_bytes = 0;
    uint64_t inflight = 0;  // injected, not yet acked or declared lost
    double allowance = 0.0;  // pacing token bucket, bytes

    // feedback events indexed by arrival tick
    std::vector<std::vector<Event>> events(static_cast<size_t>(duration_ms + 2 * rtt + 2));

    // request-response bookkeeping
    bool rr = workload == Workload::RequestResponse;
    int64_t txn_start_ms = 0;            // client issue time of current request
    int64_t server_ready_ms = half_rtt;  // when the server may start the response
    uint64_t txn_to_send = rr ? kResponseBytes : 0;
    uint64_t txn_to_deliver = rr ? kResponseBytes : 0;

    for (int64_t now = 0; now < duration_ms; ++now) {
        // 1. feedback arriving this tick
        for (const Event& ev : events[static_cast<size_t>(now)]) {
            if (ev.is_loss) cc.on_loss(ev.bytes, now);
            else cc.on_ack(ev.bytes, ev.rtt_sample_ms, now);
            inflight -= std::min(inflight, ev.bytes);
        }

        // 2. sender injects
        allowance += cc.pacing_rate_bps() / 8.0 * 1e-3;
        allowance = std::min(allowance, 64.0 * kPacketBytes);  // bucket cap
        uint64_t cwnd = cc.cwnd_bytes();
        uint64_t headroom = cwnd > inflight ? cwnd - inflight : 0;
        uint64_t budget = std::min<uint64_t>(static_cast<uint64_t>(allowance), headroom);
        if (rr) {
            budget = now >= server_ready_ms ? std::min(budget, txn_to_send) : 0;
        }
        if (budget > 0) {
            allowance -= static_cast<double>(budget);
            stats.injected += budget;
            inflight += budget;
            cc.on_send(budget, now);
            if (rr) txn_to_send -= budget;
            uint64_t space = static_cast<uint64_t>(condition.queue_bytes) > queue_bytes
                                 ? static_cast<uint64_t>(condition.queue_bytes) - queue_bytes
                                 : 0;
            uint64_t accepted = std::min(budget, space);
            uint64_t drop = budget - accepted;
            if (accepted > 0) {
                queue.push_back({accepted, now});
                queue_bytes += accepted;
            }
            if (drop > 0) {
                stats.dropped += drop;
                size_t when = static_cast<size_t>(now + rtt);
                events[when].push_back({drop, 0.0, true});
                if (rr) txn_to_deliver -= std::min(txn_to_deliver, drop);  // retransmit-free model
            }
        }

        // 3. link drains at the trace's delivery opportunities
        uint32_t opportunities = per_ms[static_cast<size_t>((now + phase) % span)];
        for (uint32_t o = 0; o < opportunities && !queue.empty(); ++o) {
            uint64_t drain = kPacketBytes;
            while (drain > 0 && !queue.empty()) {
                QueueChunk& front = queue.front();
                uint64_t take = std::min(front.bytes, drain);
                front.bytes -= take;
                drain -= take;
                queue_bytes -= take;
                stats.delivered += take;
                double rtt_sample = static_cast<double>(now - front.enqueue_ms) +
                                    static_cast<double>(rtt);
                events[static_cast<size_t>(now + rtt)].push_back({take, rtt_sample, false});
                if (rr && txn_to_deliver > 0) {
                    uint64_t done = std::min(txn_to_deliver, take);
                    txn_to_deliver -= done;
                    if (txn_to_deliver == 0) {
                        // client holds the full response half an RTT later
                        double completion =
                            static_cast<double>(now + half_rtt - txn_start_ms);
                        stats.request_completions_ms.push_back(completion);
                        txn_start_ms = now + half_rtt;  // next request, back to back
                        server_ready_ms = txn_start_ms + half_rtt;
                        txn_to_send = kResponseBytes;
                        txn_to_deliver = kResponseBytes;
                    }
                }
                if (front.bytes == 0) queue.pop_front();
            }
        }
    }

    stats.queue_residual = queue_bytes;
    stats.goodput_mbps = static_cast<double>(stats.delivered) * 8.0 /
                         (static_cast<double>(duration_ms) * 1e-3) / 1e6;
    return stats;
}

util::Measurement measure(const NetworkCondition& condition, const CcModel& prototype,
                          uint64_t seed) {
    double tput_sum = 0.0;
    for (uint64_t r = 0; r < 3; ++r) {
        auto cc = prototype.clone();
        SimStats s = simulate(condition, *cc, 10000, Workload::BulkDownload, seed + r);
        tput_sum += s.goodput_mbps;
    }
    auto cc = prototype.clone();
    SimStats rr = simulate(condition, *cc, 30000, Workload::RequestResponse, seed);
    double lat;
    if (rr.request_completions_ms.empty()) {
        lat = 30000.0;  // starved-run sentinel
    } else {
        std::vector<double> c = rr.request_completions_ms;
        std::sort(c.begin(), c.end());
        size_t n = c.size();
        lat = n % 2 == 1 ? c[n / 2] : (c[n / 2 - 1] + c[n / 2]) / 2.0;
    }
    return {tput_sum / 3.0, lat};
}

SimBackend::SimBackend(std::vector<NetworkCondition> grid, uint64_t seed)
    : grid_(std::move(grid)), seed_(seed) {
    baseline_cache_.assign(grid_.size(), {false, {}});
}

void SimBackend::register_candidate(const std::string& id, BbrParams params) {
    registry_.push_back({id, params});
}

std::optional<util::Measurement> SimBackend::measure(const std::string& candidate_id,
                                                     int condition_index) const {
    for (const auto& [id, params] : registry_) {
        if (id == candidate_id) {
            BbrModel cc(params);
            uint64_t run_seed = mix_seed(seed_, "cell") +
                                static_cast<uint64_t>(condition_index);
            return sim::measure(grid_[static_cast<size_t>(condition_index)], cc, run_seed);
        }
    }
    return std::nullopt;  // unknown candidate == failed measurement
}

util::Measurement SimBackend::baseline(int condition_index) const {
    auto& slot = baseline_cache_[static_cast<size_t>(condition_index)];
    if (!slot.first) {
        BbrModel cc(BbrParams::defaults());
        uint64_t run_seed = mix_seed(seed_, "cell") +
                            static_cast<uint64_t>(condition_index);
        slot = {true, sim::measure(grid_[static_cast<size_t>(condition_index)], cc, run_seed)};
    }
    return slot.second;
}

}  // namespace ccopt::sim
