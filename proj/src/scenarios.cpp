#include "swarmsync/scenarios.hpp"

#include <stdexcept>

namespace swarmsync {

namespace {

NodeSpec sync_node(int id, int number) {
    NodeSpec n;
    n.id = id;
    n.nodeNumber = number;
    n.initialInSync = true;
    return n;
}

void hold(MobilityTrace& trace, int id, double x, double y) {
    trace[id] = {{0, x, y}};
}

// Two synced nodes: one parked at the origin, one riding in at 5 m/s, dwelling
// next to it, then leaving. In range (30 m) from t=2000 until t=40000.
Scenario approach2() {
    Scenario s;
    s.durationMs = 50000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2)};
    hold(s.trace, 0, 0, 0);
    s.trace[1] = {{0, 40, 0}, {7000, 5, 0}, {35000, 5, 0}, {50000, 80, 0}};
    return s;
}

// Three stationary nodes in a line; the ends only hear the middle.
Scenario chain3() {
    Scenario s;
    s.durationMs = 20000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2), sync_node(2, 3)};
    hold(s.trace, 0, 0, 0);
    hold(s.trace, 1, 25, 0);
    hold(s.trace, 2, 50, 0);
    return s;
}

// Two 3-node clusters, 100 m apart; the second rides over at 5 m/s starting
// t=2000 and parks interleaved with the first. First contact at t=15000.
Scenario merge2x3() {
    Scenario s;
    s.durationMs = 30000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2), sync_node(2, 3),
               sync_node(3, 4), sync_node(4, 5), sync_node(5, 6)};
    hold(s.trace, 0, 0, 0);
    hold(s.trace, 1, 5, 0);
    hold(s.trace, 2, 0, 5);
    s.trace[3] = {{0, 100, 0}, {2000, 100, 0}, {20000, 10, 0}};
    s.trace[4] = {{0, 105, 0}, {2000, 105, 0}, {20000, 15, 0}};
    s.trace[5] = {{0, 100, 5}, {2000, 100, 5}, {20000, 10, 5}};
    return s;
}

// A synced trio; one node rides away at 10 m/s from t=10000 and never returns.
Scenario departure() {
    Scenario s;
    s.durationMs = 30000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2), sync_node(2, 3)};
    hold(s.trace, 0, 0, 0);
    hold(s.trace, 1, 10, 0);
    s.trace[2] = {{0, 20, 0}, {10000, 20, 0}, {30000, 220, 0}};
    return s;
}

// Two riders crossing in opposite directions at 6 m/s; in range roughly
// t=22500..27500, long enough to sync in passing.
Scenario passing() {
    Scenario s;
    s.durationMs = 35000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2)};
    s.trace[0] = {{0, 0, 0}, {50000, 300, 0}};
    s.trace[1] = {{0, 300, 0}, {50000, 0, 0}};
    return s;
}

// Two out-of-sync nodes parked in range sharing node number 1; nothing can be
// heard until a redraw separates them.
Scenario conflict2() {
    Scenario s;
    s.durationMs = 12000;
    NodeSpec a;
    a.id = 0;
    a.nodeNumber = 1;
    NodeSpec b;
    b.id = 1;
    b.nodeNumber = 1;
    s.nodes = {a, b};
    hold(s.trace, 0, 0, 0);
    hold(s.trace, 1, 10, 0);
    return s;
}

// Swarm A with a randomPhase-faulty node parked inside its range; swarm B,
// synced at a common phase, parked 300 m away and out of the fault's reach.
Scenario faulty_neighbor() {
    Scenario s;
    s.durationMs = 20000;
    s.nodes = {sync_node(0, 1), sync_node(1, 2), sync_node(2, 3),
               sync_node(3, 1), sync_node(4, 2), sync_node(5, 3)};
    for (int id : {3, 4, 5}) {
        s.nodes[static_cast<std::size_t>(id)].initialPhase = 700;
    }
    NodeSpec bad;
    bad.id = 6;
    bad.nodeNumber = 4;
    s.nodes.push_back(bad);
    hold(s.trace, 0, 0, 0);
    hold(s.trace, 1, 5, 0);
    hold(s.trace, 2, 0, 5);
    hold(s.trace, 3, 300, 0);
    hold(s.trace, 4, 305, 0);
    hold(s.trace, 5, 300, 5);
    hold(s.trace, 6, 10, 5);
    FaultSpec f;
    f.nodeId = 6;
    f.kind = FaultKind::randomPhase;
    f.startTime = 0;
    f.endTime = s.durationMs;
    s.faults = {f};
    return s;
}

}  // namespace

Scenario canned_scenario(const std::string& name) {
    Scenario s;
    if (name == "approach2") {
        s = approach2();
    } else if (name == "chain3") {
        s = chain3();
    } else if (name == "merge2x3") {
        s = merge2x3();
    } else if (name == "departure") {
        s = departure();
    } else if (name == "passing") {
        s = passing();
    } else if (name == "conflict2") {
        s = conflict2();
    } else if (name == "faultyNeighbor") {
        s = faulty_neighbor();
    } else if (name == "baselineCompare") {
        s = approach2();
        s.variant = ProtocolVariant::fireAtZero;
    } else {
        throw std::invalid_argument("unknown canned scenario: " + name);
    }
    // All canned scenarios model a radio with +-2 ms latency jitter. A perfectly
    // constant latency is an idealization with a pathological fixed point: two
    // phase tracks about half a period apart can adopt each other forever in
    // lockstep, because each side sees the other's latency-stale phase as
    // circularly behind. Real transceivers dither enough to dissolve that orbit,
    // and so does this jitter.
    s.radio.latencyJitter = 2;
    return s;
}

const std::vector<std::string>& canned_scenario_names() {
    static const std::vector<std::string> names = {
        "approach2", "chain3",    "merge2x3",       "departure",
        "passing",   "conflict2", "faultyNeighbor", "baselineCompare"};
    return names;
}

}  // namespace swarmsync
