#include "swarmsync/netsim.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "swarmsync/addressing.hpp"

namespace swarmsync {

Vec2 position_at(std::span<const Waypoint> waypoints, std::int64_t t) {
    if (waypoints.empty()) {
        return {};
    }
    if (t <= waypoints.front().t) {
        return {waypoints.front().x, waypoints.front().y};
    }
    if (t >= waypoints.back().t) {
        return {waypoints.back().x, waypoints.back().y};
    }
    const auto it = std::upper_bound(
        waypoints.begin(), waypoints.end(), t,
        [](std::int64_t v, const Waypoint& w) { return v < w.t; });
    const Waypoint& b = *it;
    const Waypoint& a = *(it - 1);
    const double f = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::send: return "send";
        case EventKind::deliver: return "deliver";
        case EventKind::drop: return "drop";
        case EventKind::adopt: return "adopt";
        case EventKind::syncEnter: return "syncEnter";
        case EventKind::syncExit: return "syncExit";
        case EventKind::redraw: return "redraw";
    }
    return "?";
}

std::optional<EventKind> event_kind_from(const std::string& name) {
    for (EventKind k : {EventKind::send, EventKind::deliver, EventKind::drop, EventKind::adopt,
                        EventKind::syncEnter, EventKind::syncExit, EventKind::redraw}) {
        if (name == event_kind_name(k)) {
            return k;
        }
    }
    return std::nullopt;
}

std::vector<std::string> validate_scenario(const Scenario& scenario) {
    std::vector<std::string> errs = validate(scenario.config);
    const auto& radio = scenario.radio;
    if (!(radio.range > 0.0)) {
        errs.push_back("radio.range: must be > 0");
    }
    if (radio.latencyMean < 0) {
        errs.push_back("radio.latencyMean: must be >= 0");
    }
    if (radio.latencyJitter < 0 || radio.latencyJitter > radio.latencyMean) {
        errs.push_back("radio.latencyJitter: must be in [0, radio.latencyMean] so latency stays nonnegative");
    }
    if (!(radio.lossProbability >= 0.0 && radio.lossProbability < 1.0)) {
        errs.push_back("radio.lossProbability: must be in [0, 1)");
    }
    if (scenario.tickMs < 1) {
        errs.push_back("tickMs: must be >= 1");
    }
    if (scenario.durationMs < 1) {
        errs.push_back("durationMs: must be >= 1");
    }
    if (scenario.nodes.empty()) {
        errs.push_back("nodes: must contain at least one node");
    }

    std::set<int> ids;
    for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
        const NodeSpec& node = scenario.nodes[i];
        const std::string at = "nodes[" + std::to_string(i) + "]";
        if (node.id < 0) {
            errs.push_back(at + ".id: must be >= 0");
        }
        if (!ids.insert(node.id).second) {
            errs.push_back(at + ".id: duplicate node id " + std::to_string(node.id));
        }
        if (node.nodeNumber &&
            (*node.nodeNumber < 1 || *node.nodeNumber > scenario.config.addressCount)) {
            errs.push_back(at + ".nodeNumber: outside {1.." +
                           std::to_string(scenario.config.addressCount) + "}");
        }
        if (node.clockOffset && *node.clockOffset < 0) {
            errs.push_back(at + ".clockOffset: must be >= 0");
        }
        if (node.initialPhase &&
            (*node.initialPhase < 0 || *node.initialPhase >= scenario.config.period)) {
            errs.push_back(at + ".initialPhase: must be in [0, period)");
        }
        if (!node.initialInSync && node.initialPhase && *node.initialPhase != 0) {
            errs.push_back(at + ".initialPhase: out-of-sync start pins phase 0");
        }
        const auto tr = scenario.trace.find(node.id);
        if (tr == scenario.trace.end() || tr->second.empty()) {
            errs.push_back("trace[" + std::to_string(node.id) + "]: node has no waypoints");
        }
    }
    for (const auto& [id, wps] : scenario.trace) {
        if (!ids.count(id)) {
            errs.push_back("trace[" + std::to_string(id) + "]: no such node");
            continue;
        }
        for (std::size_t k = 1; k < wps.size(); ++k) {
            if (wps[k].t <= wps[k - 1].t) {
                errs.push_back("trace[" + std::to_string(id) +
                               "]: waypoint times must be strictly increasing");
                break;
            }
        }
    }
    for (std::size_t i = 0; i < scenario.faults.size(); ++i) {
        const FaultSpec& f = scenario.faults[i];
        const std::string at = "faults[" + std::to_string(i) + "]";
        if (!ids.count(f.nodeId)) {
            errs.push_back(at + ".nodeId: no such node " + std::to_string(f.nodeId));
        }
        if (f.startTime >= f.endTime) {
            errs.push_back(at + ".startTime: must be < endTime");
        }
        if (f.stuckPhase && (*f.stuckPhase < 0 || *f.stuckPhase >= scenario.config.period)) {
            errs.push_back(at + ".stuckPhase: must be in [0, period)");
        }
    }
    return errs;
}

DeliveryPlan deliver(const PhaseMessage& msg, const Vec2& senderPos,
                     std::span<const ReceiverCandidate> candidates, std::int64_t sendTime,
                     const RadioModel& radio, bool sharedChannel, Rng& rng) {
    DeliveryPlan plan;
    const double r2 = radio.range * radio.range;
    for (const ReceiverCandidate& cand : candidates) {
        const double dx = cand.pos.x - senderPos.x;
        const double dy = cand.pos.y - senderPos.y;
        if (dx * dx + dy * dy > r2) {
            continue;
        }
        if (!sharedChannel && cand.nodeNumber == msg.senderAddress) {
            continue;
        }
        if (rng.bernoulli(radio.lossProbability)) {
            plan.lost.push_back(cand.nodeId);
            continue;
        }
        const std::int64_t jitter = rng.uniform_int(-radio.latencyJitter, radio.latencyJitter);
        plan.delivered.push_back({cand.nodeId, sendTime + radio.latencyMean + jitter});
    }
    return plan;
}

std::optional<PhaseMessage> inject_fault(const FaultSpec& fault, FaultState& fs, int nodeNumber,
                                         std::int64_t now, const ProtocolConfig& cfg, Rng& rng) {
    if (now < fault.startTime || now >= fault.endTime) {
        return std::nullopt;
    }
    if (fault.kind == FaultKind::floodZero) {
        return PhaseMessage{0, nodeNumber};
    }
    if (fs.everEmitted && now - fs.lastEmitTime < cfg.broadcastInterval) {
        return std::nullopt;
    }
    fs.lastEmitTime = now;
    fs.everEmitted = true;
    if (fault.kind == FaultKind::stuckPhase) {
        if (!fs.stuckValue) {
            fs.stuckValue =
                fault.stuckPhase ? *fault.stuckPhase : rng.uniform_int(0, cfg.period - 1);
        }
        return PhaseMessage{*fs.stuckValue, nodeNumber};
    }
    return PhaseMessage{rng.uniform_int(0, cfg.period - 1), nodeNumber};
}

namespace {

struct QueuedDelivery {
    std::int64_t time = 0;
    std::uint64_t seq = 0;
    int receiverIdx = 0;
    PhaseMessage msg;
};

struct QueueOrder {
    bool operator()(const QueuedDelivery& a, const QueuedDelivery& b) const {
        return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
};

}  // namespace

RunResult run(const Scenario& scenario) {
    {
        const auto errs = validate_scenario(scenario);
        if (!errs.empty()) {
            std::string joined = "invalid scenario:";
            for (const auto& e : errs) {
                joined += "\n  " + e;
            }
            throw std::invalid_argument(joined);
        }
    }
    const ProtocolConfig& cfg = scenario.config;
    const bool shared = scenario.variant == ProtocolVariant::fireAtZero;

    std::vector<NodeSpec> nodes = scenario.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    const std::size_t n = nodes.size();

    RunResult result;
    const std::int64_t tickCount = (scenario.durationMs + scenario.tickMs - 1) / scenario.tickMs;
    result.snapshots.reserve(static_cast<std::size_t>(tickCount) * n);

    std::vector<NodeState> state(n);
    std::vector<std::int64_t> offset(n);
    std::vector<Rng> protoRng;
    protoRng.reserve(n);
    std::vector<bool> faulty(n, false);
    std::vector<std::vector<std::size_t>> nodeFaults(n);
    std::vector<std::span<const Waypoint>> path(n);
    std::vector<Vec2> pos(n);
    std::vector<std::vector<PhaseMessage>> inbox(n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t fi = 0; fi < scenario.faults.size(); ++fi) {
            if (scenario.faults[fi].nodeId == nodes[i].id) {
                faulty[i] = true;
                nodeFaults[i].push_back(fi);
            }
        }
    }

    // Every node performs the same five draws in a fixed order regardless of
    // which fields its spec pins, so resolved values never shift when a
    // scenario pins one field and leaves another free.
    for (std::size_t i = 0; i < n; ++i) {
        const NodeSpec& spec = nodes[i];
        Rng init(mix_seed(scenario.seed, kStreamNodeInit, static_cast<std::uint64_t>(spec.id)));
        const std::int64_t offsetDraw = init.uniform_int(0, 10 * cfg.period - 1);
        const int numberDraw = draw_node_number(init, cfg.addressCount);
        const std::int64_t phaseDraw = init.uniform_int(0, cfg.period - 1);
        const std::int64_t broadcastStagger = init.uniform_int(0, cfg.broadcastInterval - 1);
        const std::int64_t redrawStagger = init.uniform_int(0, cfg.redrawInterval - 1);

        offset[i] = spec.clockOffset ? *spec.clockOffset : offsetDraw;
        const int number = spec.nodeNumber ? *spec.nodeNumber : numberDraw;
        const std::int64_t phase0 =
            spec.initialInSync ? (spec.initialPhase ? *spec.initialPhase : phaseDraw) : 0;
        const std::int64_t local0 = offset[i];

        NodeState& st = state[i];
        st.inSync = spec.initialInSync;
        st.phase = phase0;
        st.lastTimeCheck = local0;
        // An in-sync start counts as freshly heard; an out-of-sync start is
        // already past the liveness horizon.
        st.lastReceiveTime = spec.initialInSync ? local0 : local0 - cfg.timeToOutOfSync;
        st.nodeNumber = number;
        st.lastBroadcastTime = local0 - broadcastStagger;
        st.lastRedrawTime = local0 - redrawStagger;

        protoRng.emplace_back(
            mix_seed(scenario.seed, kStreamNodeProtocol, static_cast<std::uint64_t>(spec.id)));
        path[i] = scenario.trace.at(spec.id);
        result.inits.push_back({spec.id, offset[i], number, spec.initialInSync, phase0,
                                broadcastStagger, redrawStagger, faulty[i]});
    }

    Rng radioRng(mix_seed(scenario.seed, kStreamRadio, 0));
    std::vector<FaultState> faultStates(scenario.faults.size());
    std::vector<Rng> faultRng;
    faultRng.reserve(scenario.faults.size());
    for (std::size_t fi = 0; fi < scenario.faults.size(); ++fi) {
        faultRng.emplace_back(mix_seed(scenario.seed, kStreamFault, fi));
    }

    std::priority_queue<QueuedDelivery, std::vector<QueuedDelivery>, QueueOrder> queue;
    std::uint64_t seqCounter = 0;

    const auto broadcast = [&](std::size_t senderIdx, std::int64_t t, const PhaseMessage& msg) {
        result.events.push_back({t, EventKind::send, nodes[senderIdx].id, msg.phase,
                                 msg.senderAddress});
        std::vector<ReceiverCandidate> candidates;
        candidates.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != senderIdx) {
                candidates.push_back({nodes[j].id, pos[j], state[j].nodeNumber});
            }
        }
        const DeliveryPlan plan =
            deliver(msg, pos[senderIdx], candidates, t, scenario.radio, shared, radioRng);
        for (int lostId : plan.lost) {
            result.events.push_back({t, EventKind::drop, lostId, msg.phase, msg.senderAddress});
        }
        for (const DeliveryPlan::Entry& d : plan.delivered) {
            const std::size_t idx = static_cast<std::size_t>(
                std::lower_bound(nodes.begin(), nodes.end(), d.nodeId,
                                 [](const NodeSpec& nd, int id) { return nd.id < id; }) -
                nodes.begin());
            queue.push({d.deliveryTime, seqCounter++, static_cast<int>(idx), msg});
        }
    };

    for (std::int64_t t = 0; t < scenario.durationMs; t += scenario.tickMs) {
        for (std::size_t i = 0; i < n; ++i) {
            pos[i] = position_at(path[i], t);
        }
        while (!queue.empty() && queue.top().time <= t) {
            const QueuedDelivery d = queue.top();
            queue.pop();
            inbox[d.receiverIdx].push_back(d.msg);
            result.events.push_back({t, EventKind::deliver, nodes[d.receiverIdx].id, d.msg.phase,
                                     d.msg.senderAddress});
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int id = nodes[i].id;
            if (faulty[i]) {
                for (std::size_t fi : nodeFaults[i]) {
                    const auto msg =
                        inject_fault(scenario.faults[fi], faultStates[fi],
                                     shared ? 0 : state[i].nodeNumber, t, cfg, faultRng[fi]);
                    if (msg) {
                        broadcast(i, t, *msg);
                    }
                }
                inbox[i].clear();
                result.snapshots.push_back(
                    {t, id, pos[i].x, pos[i].y, false, 0, state[i].nodeNumber, cfg.hiAmplitude});
                continue;
            }
            const std::int64_t local = t + offset[i];
            const bool beforeInSync = state[i].inSync;
            if (!shared && maybe_redraw(state[i], local, protoRng[i], cfg)) {
                result.events.push_back(
                    {t, EventKind::redraw, id, state[i].phase, state[i].nodeNumber});
            }
            const StepOutput out =
                shared ? baseline_fire_at_zero_step(state[i], local, inbox[i], cfg, protoRng[i])
                       : node_step(state[i], local, inbox[i], cfg);
            inbox[i].clear();
            for (const StepOutput::Adoption& a : out.adoptions) {
                result.events.push_back({t, EventKind::adopt, id, a.newPhase, a.fromAddress});
            }
            if (out.broadcast) {
                broadcast(i, t, *out.broadcast);
            }
            if (state[i].inSync != beforeInSync) {
                result.events.push_back({t, beforeInSync ? EventKind::syncExit : EventKind::syncEnter,
                                         id, state[i].phase, state[i].nodeNumber});
            }
            result.snapshots.push_back({t, id, pos[i].x, pos[i].y, state[i].inSync, state[i].phase,
                                        state[i].nodeNumber, out.amplitude});
        }
    }
    result.complete = true;
    return result;
}

}  // namespace swarmsync
