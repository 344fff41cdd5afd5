#pragma once

#include <cstdint>
#include <memory>

namespace ccopt::sim {

// Congestion controller contract used by the fluid simulator.
class CcModel {
public:
    virtual ~CcModel() = default;
    virtual void on_send(uint64_t bytes, int64_t now_ms) = 0;
    virtual void on_ack(uint64_t bytes, double rtt_ms, int64_t now_ms) = 0;
    virtual void on_loss(uint64_t bytes, int64_t now_ms) = 0;
    virtual double pacing_rate_bps() const = 0;  // >= 0
    virtual uint64_t cwnd_bytes() const = 0;     // >= 1 packet
    virtual std::unique_ptr<CcModel> clone() const = 0;
};

// The five tunables; defaults are the BBR defaults, the conservative and
// aggressive variants live in the parameter grid.
struct BbrParams {
    int initial_window_packets = 16;
    double high_gain = 2885.0 / 1000.0 + 1.0;
    double startup_growth_target = 5.0 / 4.0;
    double drain_gain = 1000.0 / 2885.0;
    double cwnd_gain = 2.0;

    static BbrParams defaults() { return {}; }
    static BbrParams conservative();
    static BbrParams aggressive();
};

// Model-based controller with the BBR state shape: Startup (high gain until
// bandwidth growth stalls for 3 rounds), Drain (until inflight <= BDP),
// ProbeBW (8-phase gain cycle), ProbeRTT (periodic 200 ms floor).
class BbrModel : public CcModel {
public:
    explicit BbrModel(BbrParams params = {});

    void on_send(uint64_t bytes, int64_t now_ms) override;
    void on_ack(uint64_t bytes, double rtt_ms, int64_t now_ms) override;
    void on_loss(uint64_t bytes, int64_t now_ms) override;
    double pacing_rate_bps() const override;
    uint64_t cwnd_bytes() const override;
    std::unique_ptr<CcModel> clone() const override;

    const BbrParams& params() const { return params_; }

private:
    enum class State { Startup, Drain, ProbeBw, ProbeRtt };

    double bdp_bytes() const;
    void advance_round(int64_t now_ms);

    BbrParams params_;
    State state_ = State::Startup;
    State state_before_probe_rtt_ = State::Startup;

    double btl_bw_bps_ = 0.0;        // max filter output
    double bw_window_[10] = {};      // per-round delivery rates
    int bw_window_pos_ = 0;
    double min_rtt_ms_ = 100.0;
    bool min_rtt_seen_ = false;
    int64_t min_rtt_stamp_ms_ = 0;

    uint64_t inflight_ = 0;
    uint64_t round_acked_ = 0;
    int64_t round_start_ms_ = 0;
    double last_round_bw_bps_ = 0.0;
    int stall_rounds_ = 0;

    int probe_bw_phase_ = 0;
    int64_t phase_start_ms_ = 0;
    int64_t probe_rtt_start_ms_ = -1;

    double pacing_gain_;
    uint64_t cwnd_;
};

}  // namespace ccopt::sim
