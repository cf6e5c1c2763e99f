#ifndef SWARMSYNC_NETSIM_HPP
#define SWARMSYNC_NETSIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmsync/protocol.hpp"
#include "swarmsync/rng.hpp"

namespace swarmsync {

// Unit-disk radio with a closed boundary: a receiver at exactly `range` meters
// still hears the message. Latency is latencyMean plus uniform integer jitter
// in [-latencyJitter, +latencyJitter].
struct RadioModel {
    double range = 30.0;            // meters
    std::int64_t latencyMean = 15;  // ms
    std::int64_t latencyJitter = 0; // ms, half-width; must not exceed latencyMean
    double lossProbability = 0.0;   // per receiver, in [0, 1)
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Waypoint {
    std::int64_t t = 0;  // global sim time, ms
    double x = 0.0;
    double y = 0.0;
};

// Per node: piecewise-linear schedule, strictly increasing in t. Position holds
// at the first waypoint before it and at the last waypoint after it.
using MobilityTrace = std::map<int, std::vector<Waypoint>>;

Vec2 position_at(std::span<const Waypoint> waypoints, std::int64_t t);

enum class FaultKind { randomPhase, stuckPhase, floodZero };

// A faulty node broadcasts in [startTime, endTime) without following the
// protocol and never adopts. randomPhase and stuckPhase emit once per
// broadcastInterval; floodZero emits every tick.
struct FaultSpec {
    int nodeId = 0;
    FaultKind kind = FaultKind::randomPhase;
    std::int64_t startTime = 0;
    std::int64_t endTime = 0;
    std::optional<std::int64_t> stuckPhase;  // stuckPhase kind: fixed value, drawn if absent
};

struct NodeSpec {
    int id = 0;
    std::optional<int> nodeNumber;          // drawn uniformly from {1..N} if absent
    std::optional<std::int64_t> clockOffset; // drawn uniformly from [0, 10*period) if absent
    bool initialInSync = false;
    std::optional<std::int64_t> initialPhase; // in-sync start: drawn from [0, period) if absent
};

enum class ProtocolVariant { mainProtocol, fireAtZero };

struct Scenario {
    ProtocolVariant variant = ProtocolVariant::mainProtocol;
    ProtocolConfig config;
    std::vector<NodeSpec> nodes;
    MobilityTrace trace;
    RadioModel radio;
    std::vector<FaultSpec> faults;
    std::uint64_t seed = 0;
    std::int64_t durationMs = 0;
    std::int64_t tickMs = 1;
};

// Returns one message per violation (empty when the scenario is runnable).
// Messages start with the offending field path, e.g. "radio.lossProbability".
std::vector<std::string> validate_scenario(const Scenario& scenario);

enum class EventKind { send, deliver, drop, adopt, syncEnter, syncExit, redraw };

const char* event_kind_name(EventKind kind);
std::optional<EventKind> event_kind_from(const std::string& name);

// One log record. t is global sim time; phase/address depend on the kind:
//   send/deliver/drop: message payload and sender address (deliver/drop carry
//   the receiving node's id), adopt: new phase and the address it came from,
//   syncEnter/syncExit: node's phase and own number, redraw: the new number.
struct Event {
    std::int64_t t = 0;
    EventKind kind = EventKind::send;
    int nodeId = 0;
    std::int64_t phase = 0;
    int address = 0;
};

// Post-step state of one node at one tick.
struct SnapshotRow {
    std::int64_t t = 0;
    int nodeId = 0;
    double x = 0.0;
    double y = 0.0;
    bool inSync = false;
    std::int64_t phase = 0;
    int address = 0;
    double amplitude = 0.0;
};

// The values every per-node draw resolved to, for reproducing a run externally.
struct NodeInit {
    int nodeId = 0;
    std::int64_t clockOffset = 0;
    int nodeNumber = 1;
    bool initialInSync = false;
    std::int64_t initialPhase = 0;
    std::int64_t broadcastStagger = 0;  // first beacon due at global t = broadcastInterval - stagger
    std::int64_t redrawStagger = 0;
    bool faulty = false;
};

struct RunResult {
    std::vector<Event> events;
    std::vector<SnapshotRow> snapshots;
    std::vector<NodeInit> inits;
    bool complete = true;
};

// Plans one broadcast's deliveries. Candidates must exclude the sender and be
// given in ascending node id; each in-range, address-compatible candidate first
// survives loss, then gets a jittered delivery time. Loss casualties are
// reported so the engine can log drops. sharedChannel bypasses the address
// check (fire-at-zero variant).
struct ReceiverCandidate {
    int nodeId = 0;
    Vec2 pos;
    int nodeNumber = 0;
};

struct DeliveryPlan {
    struct Entry {
        int nodeId = 0;
        std::int64_t deliveryTime = 0;
    };
    std::vector<Entry> delivered;
    std::vector<int> lost;
};

DeliveryPlan deliver(const PhaseMessage& msg, const Vec2& senderPos,
                     std::span<const ReceiverCandidate> candidates, std::int64_t sendTime,
                     const RadioModel& radio, bool sharedChannel, Rng& rng);

// Per-fault bookkeeping across ticks.
struct FaultState {
    std::int64_t lastEmitTime = 0;
    bool everEmitted = false;
    std::optional<std::int64_t> stuckValue;
};

// Emits the fault's message for this tick, or nothing (outside the window, or
// cadence not due). nodeNumber becomes the sender address.
std::optional<PhaseMessage> inject_fault(const FaultSpec& fault, FaultState& fs, int nodeNumber,
                                         std::int64_t now, const ProtocolConfig& cfg, Rng& rng);

// Runs the scenario tick by tick. Fully deterministic given the scenario
// (including its seed). Throws std::invalid_argument listing all validation
// errors before any stepping.
RunResult run(const Scenario& scenario);

}  // namespace swarmsync

#endif
