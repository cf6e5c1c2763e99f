#include "swarmsync/protocol.hpp"

#include <cmath>
#include <cstdlib>

namespace swarmsync {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool malformed(const PhaseMessage& msg, std::int64_t period) {
    return msg.phase < 0 || msg.phase >= period;
}
}  // namespace

std::vector<std::string> validate(const ProtocolConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.period <= 0) {
        errs.push_back("config.period: must be > 0");
    }
    if (!(cfg.loAmplitude > 0.0 && cfg.loAmplitude < cfg.hiAmplitude)) {
        errs.push_back("config.loAmplitude: requires 0 < loAmplitude < hiAmplitude");
    }
    if (cfg.allowedPhaseShift < 0 || (cfg.period > 0 && cfg.allowedPhaseShift >= cfg.period / 2)) {
        errs.push_back("config.allowedPhaseShift: must be in [0, period/2)");
    }
    if (cfg.expectedLatency < 0) {
        errs.push_back("config.expectedLatency: must be >= 0");
    }
    if (cfg.expectedLatency >= cfg.allowedPhaseShift) {
        errs.push_back(
            "config.expectedLatency: must be < config.allowedPhaseShift "
            "(compensated phases would trigger re-updates)");
    }
    if (cfg.broadcastInterval <= 0) {
        errs.push_back("config.broadcastInterval: must be > 0");
    }
    if (cfg.timeToOutOfSync <= cfg.broadcastInterval) {
        errs.push_back(
            "config.timeToOutOfSync: must be > config.broadcastInterval "
            "(one missed beacon must not drop sync)");
    }
    if (cfg.addressCount < 2) {
        errs.push_back("config.addressCount: must be >= 2");
    } else if (cfg.addressCount > 255) {
        errs.push_back("config.addressCount: must fit the 1-byte wire address (<= 255)");
    }
    if (cfg.redrawInterval <= 0) {
        errs.push_back("config.redrawInterval: must be > 0");
    }
    return errs;
}

std::int64_t compute_phase_shift(PhaseMs a, PhaseMs b, std::int64_t period) {
    std::int64_t d = std::llabs(a - b) % period;
    return d * 2 > period ? period - d : d;
}

bool circularly_behind(PhaseMs own, PhaseMs msg, std::int64_t period) {
    std::int64_t forward = wrap_phase(msg - own, period);
    return forward != 0 && forward * 2 < period;
}

PhaseMs update_phase(NodeState& state, std::int64_t now, std::int64_t period) {
    if (state.inSync) {
        state.phase = wrap_phase(state.phase + (now - state.lastTimeCheck), period);
    } else {
        state.phase = 0;
    }
    state.lastTimeCheck = now;
    return state.phase;
}

bool handle_message(NodeState& state, const PhaseMessage& msg, std::int64_t now,
                    const ProtocolConfig& cfg) {
    if (malformed(msg, cfg.period)) {
        ++state.malformedCount;
        return false;
    }
    update_phase(state, now, cfg.period);
    const bool wasInSync = state.inSync;
    state.lastReceiveTime = now;
    state.inSync = true;

    // Out-of-sync receivers adopt unconditionally: any phase is ahead of their
    // pinned 0. In-sync receivers adopt only a circularly-ahead phase whose
    // shift exceeds the tolerance.
    bool adopt;
    if (!wasInSync) {
        adopt = true;
    } else {
        adopt = circularly_behind(state.phase, msg.phase, cfg.period) &&
                compute_phase_shift(state.phase, msg.phase, cfg.period) > cfg.allowedPhaseShift;
    }
    if (adopt) {
        state.phase = wrap_phase(msg.phase + cfg.expectedLatency, cfg.period);
    }
    return adopt;
}

StepOutput node_step(NodeState& state, std::int64_t now, std::span<const PhaseMessage> inbox,
                     const ProtocolConfig& cfg) {
    StepOutput out;
    state.inSync = (now - state.lastReceiveTime) < cfg.timeToOutOfSync;
    update_phase(state, now, cfg.period);

    bool adopted = false;
    for (const PhaseMessage& msg : inbox) {
        const bool a = handle_message(state, msg, now, cfg);
        if (a) {
            out.adoptions.push_back({state.phase, msg.senderAddress});
        }
        adopted = adopted || a;
    }

    if (adopted || now - state.lastBroadcastTime >= cfg.broadcastInterval) {
        out.broadcast = PhaseMessage{state.phase, state.nodeNumber};
        state.lastBroadcastTime = now;
    }
    out.amplitude = state.inSync ? amplitude_sinusoidal(state.phase, cfg) : cfg.hiAmplitude;
    return out;
}

double amplitude_sinusoidal(PhaseMs phase, const ProtocolConfig& cfg) {
    const double x = static_cast<double>(phase) / static_cast<double>(cfg.period);
    return (std::cos(2.0 * kPi * x) + 1.0) * 0.5 * (cfg.hiAmplitude - cfg.loAmplitude) +
           cfg.loAmplitude;
}

double amplitude_piecewise(PhaseMs phase, const ProtocolConfig& cfg) {
    const double k = 2.0 * (cfg.hiAmplitude - cfg.loAmplitude) / static_cast<double>(cfg.period);
    const double half = static_cast<double>(cfg.period) / 2.0;
    const double p = static_cast<double>(phase);
    if (p < half) {
        return cfg.hiAmplitude - k * p;
    }
    return cfg.loAmplitude + k * (p - half);
}

StepOutput baseline_fire_at_zero_step(NodeState& state, std::int64_t now,
                                      std::span<const PhaseMessage> inbox,
                                      const ProtocolConfig& cfg, Rng& rng) {
    StepOutput out;
    state.inSync = (now - state.lastReceiveTime) < cfg.timeToOutOfSync;

    const bool wasInSync = state.inSync;
    const PhaseMs before = state.phase;
    const std::int64_t elapsed = now - state.lastTimeCheck;
    update_phase(state, now, cfg.period);
    const bool wrapped = wasInSync && before + elapsed >= cfg.period;

    for (const PhaseMessage& msg : inbox) {
        if (malformed(msg, cfg.period)) {
            ++state.malformedCount;
            continue;
        }
        state.lastReceiveTime = now;
        state.inSync = true;
        state.phase = wrap_phase(cfg.expectedLatency, cfg.period);
        out.adoptions.push_back({state.phase, msg.senderAddress});
    }

    bool fire = false;
    if (wrapped) {
        fire = true;
    } else if (!state.inSync) {
        // Out of sync there is no wrap to fire on; fire episodically instead.
        if (state.baselineBroadcastDelay <= 0) {
            state.baselineBroadcastDelay =
                rng.uniform_int(cfg.broadcastInterval, 2 * cfg.broadcastInterval);
        }
        if (now - state.lastBroadcastTime >= state.baselineBroadcastDelay) {
            fire = true;
            state.baselineBroadcastDelay =
                rng.uniform_int(cfg.broadcastInterval, 2 * cfg.broadcastInterval);
        }
    }
    if (fire) {
        out.broadcast = PhaseMessage{state.phase, 0};
        state.lastBroadcastTime = now;
    }
    out.amplitude = state.inSync ? amplitude_sinusoidal(state.phase, cfg) : cfg.hiAmplitude;
    return out;
}

std::array<std::uint8_t, 5> encode_message(const PhaseMessage& msg) {
    const auto p = static_cast<std::uint32_t>(msg.phase);
    return {static_cast<std::uint8_t>(p & 0xff), static_cast<std::uint8_t>((p >> 8) & 0xff),
            static_cast<std::uint8_t>((p >> 16) & 0xff),
            static_cast<std::uint8_t>((p >> 24) & 0xff), static_cast<std::uint8_t>(msg.senderAddress)};
}

std::optional<PhaseMessage> decode_message(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != 5) {
        return std::nullopt;
    }
    std::uint32_t p = static_cast<std::uint32_t>(bytes[0]) |
                      static_cast<std::uint32_t>(bytes[1]) << 8 |
                      static_cast<std::uint32_t>(bytes[2]) << 16 |
                      static_cast<std::uint32_t>(bytes[3]) << 24;
    return PhaseMessage{static_cast<PhaseMs>(p), static_cast<int>(bytes[4])};
}

}  // namespace swarmsync
