#include "ccopt/sim/bbr.hpp"

#include <algorithm>
#include <cmath>

namespace ccopt::sim {

namespace {
constexpr uint64_t kPacketBytes = 1500;
constexpr uint64_t kMinCwndPackets = 4;
constexpr double kProbeBwGains[8] = {1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
constexpr int64_t kProbeRttIntervalMs = 10000;
constexpr int64_t kProbeRttDurationMs = 200;
}  // namespace

BbrParams BbrParams::conservative() {
    BbrParams p;
    p.initial_window_packets = 10;
    p.high_gain = 2400.0 / 1000.0 + 1.0;
    p.startup_growth_target = 6.0 / 5.0;
    p.drain_gain = 1000.0 / 3500.0;
    p.cwnd_gain = 3.0 / 2.0;
    return p;
}

BbrParams BbrParams::aggressive() {
    BbrParams p;
    p.initial_window_packets = 32;
    p.high_gain = 3500.0 / 1000.0 + 1.0;
    p.startup_growth_target = 3.0 / 2.0;
    p.drain_gain = 1000.0 / 2400.0;
    p.cwnd_gain = 5.0 / 2.0;
    return p;
}

BbrModel::BbrModel(BbrParams params) : params_(params) {
    pacing_gain_ = params_.high_gain;
    cwnd_ = static_cast<uint64_t>(params_.initial_window_packets) * kPacketBytes;
}

double BbrModel::bdp_bytes() const {
    if (btl_bw_bps_ <= 0.0) {
        return static_cast<double>(params_.initial_window_packets) * kPacketBytes;
    }
    return btl_bw_bps_ / 8.0 * (min_rtt_ms_ * 1e-3);
}

void BbrModel::on_send(uint64_t bytes, int64_t) { inflight_ += bytes; }

void BbrModel::advance_round(int64_t now_ms) {
    double dur_s = static_cast<double>(now_ms - round_start_ms_) * 1e-3;
    if (dur_s <= 0.0) dur_s = 1e-3;
    double bw = static_cast<double>(round_acked_) * 8.0 / dur_s;  // bps
    bw_window_[bw_window_pos_] = bw;
    bw_window_pos_ = (bw_window_pos_ + 1) % 10;
    btl_bw_bps_ = *std::max_element(std::begin(bw_window_), std::end(bw_window_));

    if (state_ == State::Startup) {
        if (last_round_bw_bps_ > 0.0 && bw < last_round_bw_bps_ * params_.startup_growth_target) {
            if (++stall_rounds_ >= 3) {
                state_ = State::Drain;
                pacing_gain_ = params_.drain_gain;
            }
        } else {
            stall_rounds_ = 0;
        }
        last_round_bw_bps_ = std::max(last_round_bw_bps_, bw);
    }
    round_acked_ = 0;
    round_start_ms_ = now_ms;
}

void BbrModel::on_ack(uint64_t bytes, double rtt_ms, int64_t now_ms) {
    inflight_ -= std::min(inflight_, bytes);
    round_acked_ += bytes;

    if (!min_rtt_seen_ || rtt_ms <= min_rtt_ms_) {
        min_rtt_ms_ = rtt_ms;
        min_rtt_seen_ = true;
        min_rtt_stamp_ms_ = now_ms;
    }

    if (now_ms - round_start_ms_ >= static_cast<int64_t>(std::max(1.0, min_rtt_ms_))) {
        advance_round(now_ms);
    }

    switch (state_) {
        case State::Startup:
            pacing_gain_ = params_.high_gain;
            cwnd_ += bytes;  // exponential growth while probing for the pipe
            break;
        case State::Drain:
            pacing_gain_ = params_.drain_gain;
            if (static_cast<double>(inflight_) <= bdp_bytes()) {
                state_ = State::ProbeBw;
                probe_bw_phase_ = 0;
                phase_start_ms_ = now_ms;
            }
            break;
        case State::ProbeBw: {
            if (now_ms - phase_start_ms_ >= static_cast<int64_t>(std::max(1.0, min_rtt_ms_))) {
                probe_bw_phase_ = (probe_bw_phase_ + 1) % 8;
                phase_start_ms_ = now_ms;
            }
            pacing_gain_ = kProbeBwGains[probe_bw_phase_];
            cwnd_ = static_cast<uint64_t>(params_.cwnd_gain * bdp_bytes());
            // periodic min-RTT refresh
            if (min_rtt_seen_ && now_ms - min_rtt_stamp_ms_ >= kProbeRttIntervalMs) {
                state_before_probe_rtt_ = state_;
                state_ = State::ProbeRtt;
                probe_rtt_start_ms_ = now_ms;
            }
            break;
        }
        case State::ProbeRtt:
            pacing_gain_ = 1.0;
            cwnd_ = kMinCwndPackets * kPacketBytes;
            if (now_ms - probe_rtt_start_ms_ >= kProbeRttDurationMs) {
                min_rtt_stamp_ms_ = now_ms;
                state_ = state_before_probe_rtt_;
                phase_start_ms_ = now_ms;
            }
            break;
    }
    cwnd_ = std::max(cwnd_, kMinCwndPackets * kPacketBytes);
}

void BbrModel::on_loss(uint64_t bytes, int64_t) {
    inflight_ -= std::min(inflight_, bytes);
}

double BbrModel::pacing_rate_bps() const {
    if (btl_bw_bps_ <= 0.0) {
        // no bandwidth sample yet: pace the initial window over the assumed RTT
        double iw_bits = static_cast<double>(params_.initial_window_packets) * kPacketBytes * 8.0;
        return pacing_gain_ * iw_bits / (min_rtt_ms_ * 1e-3);
    }
    return pacing_gain_ * btl_bw_bps_;
}

uint64_t BbrModel::cwnd_bytes() const { return std::max(cwnd_, kPacketBytes); }

std::unique_ptr<CcModel> BbrModel::clone() const { return std::make_unique<BbrModel>(*this); }

}  // namespace ccopt::sim
