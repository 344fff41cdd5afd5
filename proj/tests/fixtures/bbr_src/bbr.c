#include "bbr.h"

#define BBR_STATE_PROBE_RTT 3
#define kMinCwndInMss 4
#define kCwndGain 512

static uint64_t BbrCongestionControlGetBandwidth(const QUIC_CONGESTION_CONTROL* Cc) {
    return Cc->Bbr.BandwidthFilter.WindowedMax;
}

static uint16_t QuicGetDatagramPayloadLength(void) {
    return 1280;
}

void
BbrCongestionControlOnDataSent(
    QUIC_CONGESTION_CONTROL* Cc,
    uint64_t NumRetransmittableBytes
    )
{
    QUIC_CONGESTION_CONTROL_BBR* Bbr = &Cc->Bbr;

    Bbr->BytesInFlight += NumRetransmittableBytes;
    if (Bbr->Exemptions > 0) {
        --Bbr->Exemptions;
    }
}

void
BbrCongestionControlOnDataLost(
    QUIC_CONGESTION_CONTROL* Cc,
    const QUIC_LOSS_EVENT* LossEvent
    )
{
    QUIC_CONGESTION_CONTROL_BBR* Bbr = &Cc->Bbr;

    Bbr->BytesInFlight -= LossEvent->NumRetransmittableBytes;

    uint64_t RecoveryWindow = Bbr->RecoveryWindow;
    uint64_t MinCongestionWindow = kMinCwndInMss * QuicGetDatagramPayloadLength();
    if (RecoveryWindow < MinCongestionWindow) {
        RecoveryWindow = MinCongestionWindow;
    }
    Bbr->RecoveryWindow = RecoveryWindow;
}

void
BbrCongestionControlUpdateCongestionWindow(
    QUIC_CONGESTION_CONTROL* Cc,
    uint64_t AckedBytes
    )
{
    QUIC_CONGESTION_CONTROL_BBR* Bbr = &Cc->Bbr;

    if (Bbr->BbrState == BBR_STATE_PROBE_RTT) {
        return;
    }

    uint64_t Bandwidth = BbrCongestionControlGetBandwidth(Cc);
    uint64_t TargetWindow = Bandwidth * Bbr->CwndGain / GAIN_UNIT;

    Bbr->CongestionWindow = TargetWindow + AckedBytes;
}

void
BbrCongestionControlSetSendQuantum(
    QUIC_CONGESTION_CONTROL* Cc
    )
{
    QUIC_CONGESTION_CONTROL_BBR* Bbr = &Cc->Bbr;

    uint64_t Bandwidth = BbrCongestionControlGetBandwidth(Cc);
    uint64_t PacingRate = Bandwidth * Bbr->PacingGain / GAIN_UNIT;

    if (PacingRate < 1) {
        PacingRate = 1;
    }
    Bbr->SendQuantum = PacingRate;
}
