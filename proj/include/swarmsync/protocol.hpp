#ifndef SWARMSYNC_PROTOCOL_HPP
#define SWARMSYNC_PROTOCOL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmsync/rng.hpp"

namespace swarmsync {

using PhaseMs = std::int64_t;

// Shared protocol constants. Defaults beyond the 2200 ms period are
// implementation choices, all overridable per scenario.
struct ProtocolConfig {
    std::int64_t period = 2200;         // oscillation period T, ms
    double hiAmplitude = 255.0;         // light amplitude at phase 0
    double loAmplitude = 40.0;          // light amplitude at phase T/2, must stay > 0
    std::int64_t allowedPhaseShift = 60;// tolerance below which no adoption happens, ms
    std::int64_t expectedLatency = 15;  // radio latency compensation added on adoption, ms
    std::int64_t timeToOutOfSync = 3000;// silence after which a node drops out of sync, ms
    std::int64_t broadcastInterval = 250;// beacon cadence, ms
    int addressCount = 6;               // N, size of the shared address pool
    std::int64_t redrawInterval = 1000; // node-number redraw cadence while out of sync, ms
};

// Returns one human-readable violation per broken invariant, empty if valid.
// Each message starts with the offending field name.
std::vector<std::string> validate(const ProtocolConfig& cfg);

// Full per-node protocol state. All timestamps are node-local milliseconds;
// only differences of a node's own timestamps ever matter.
struct NodeState {
    bool inSync = false;
    PhaseMs phase = 0;                  // in [0, period); pinned at 0 while out of sync
    std::int64_t lastTimeCheck = 0;
    std::int64_t lastReceiveTime = 0;
    int nodeNumber = 1;                 // in {1..addressCount}
    std::int64_t lastBroadcastTime = 0;
    std::int64_t lastRedrawTime = 0;
    std::uint64_t malformedCount = 0;   // rejected messages seen (faulty-neighbor signal)
    std::int64_t baselineBroadcastDelay = 0; // fire-at-zero only: current out-of-sync fire delay
};

// Wire payload: a phase plus the sender's broadcast address.
struct PhaseMessage {
    PhaseMs phase = 0;
    int senderAddress = 0;
};

struct StepOutput {
    struct Adoption {
        PhaseMs newPhase = 0;
        int fromAddress = 0;
    };
    std::optional<PhaseMessage> broadcast;
    double amplitude = 0.0;
    std::vector<Adoption> adoptions;    // one entry per message whose phase was adopted
};

// Phase arithmetic -----------------------------------------------------------

inline PhaseMs wrap_phase(PhaseMs value, std::int64_t period) {
    PhaseMs m = value % period;
    return m < 0 ? m + period : m;
}

// Circular distance min(|a-b|, period-|a-b|); symmetric, in [0, period/2].
std::int64_t compute_phase_shift(PhaseMs a, PhaseMs b, std::int64_t period);

// True iff moving forward from `own` to `msg` along the cycle is strictly
// shorter than moving backward. At the exact antipode neither side is behind.
bool circularly_behind(PhaseMs own, PhaseMs msg, std::int64_t period);

// Advances `toTick - fromTick` ms of in-sync drift onto a phase observed at
// fromTick, giving the phase the same oscillator shows at toTick.
inline PhaseMs aligned_phase(PhaseMs phase, std::int64_t fromTick, std::int64_t toTick,
                             std::int64_t period) {
    return wrap_phase(phase + (toTick - fromTick), period);
}

// Core state machine ---------------------------------------------------------

// In sync: advance phase by elapsed time mod period. Out of sync: phase is 0.
// Always moves lastTimeCheck to now. Returns the new phase.
PhaseMs update_phase(NodeState& state, std::int64_t now, std::int64_t period);

// Processes one received message at node-local time `now`. A malformed phase
// (outside [0, period)) only bumps malformedCount. A valid receipt refreshes
// sync liveness; the phase is adopted (msg.phase + expectedLatency, mod period)
// when the receiver was out of sync, or when it is circularly behind by more
// than allowedPhaseShift. Returns whether adoption happened.
bool handle_message(NodeState& state, const PhaseMessage& msg, std::int64_t now,
                    const ProtocolConfig& cfg);

// One main-loop pass: liveness check, phase update, inbox processing, throttled
// broadcast (immediate on adoption), amplitude. Inbox order is delivery order.
StepOutput node_step(NodeState& state, std::int64_t now, std::span<const PhaseMessage> inbox,
                     const ProtocolConfig& cfg);

// Light amplitude ------------------------------------------------------------

// [cos(2*pi*phase/period) + 1] * (HI-LO)/2 + LO.
double amplitude_sinusoidal(PhaseMs phase, const ProtocolConfig& cfg);

// Triangle wave with slope 2*(HI-LO)/period, meeting HI at 0 and LO at period/2.
double amplitude_piecewise(PhaseMs phase, const ProtocolConfig& cfg);

// Fire-at-zero baseline ------------------------------------------------------

// Comparison variant: broadcast only when the phase wraps through 0 (out-of-sync
// nodes fire at uniformly random intervals in [broadcastInterval, 2x], drawn from
// `rng`); any valid receipt resets phase to expectedLatency and enters sync. All
// nodes share one address (0), so the N-address scheme is bypassed.
StepOutput baseline_fire_at_zero_step(NodeState& state, std::int64_t now,
                                      std::span<const PhaseMessage> inbox,
                                      const ProtocolConfig& cfg, Rng& rng);

// Wire codec -----------------------------------------------------------------
// 4-byte little-endian unsigned phase in ms, then 1 sender-address byte.

std::array<std::uint8_t, 5> encode_message(const PhaseMessage& msg);
std::optional<PhaseMessage> decode_message(std::span<const std::uint8_t> bytes);

}  // namespace swarmsync

#endif
