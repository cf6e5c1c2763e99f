#ifndef SWARMSYNC_METRICS_HPP
#define SWARMSYNC_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarmsync/netsim.hpp"

namespace swarmsync {

// The swarm structure at one instant: connected components (size >= 2) of the
// in-range, mutually audible, in-sync graph, plus everything else as singletons.
struct SwarmPartition {
    std::int64_t t = 0;
    std::vector<std::vector<int>> components;  // each sorted by id, ordered by smallest member
    std::vector<int> singletons;               // sorted by id
};

// tickRows must be the snapshot rows of a single tick. sharedChannel drops the
// address-compatibility requirement (fire-at-zero variant).
SwarmPartition detect_swarms(std::span<const SnapshotRow> tickRows, const RadioModel& radio,
                             bool sharedChannel);

struct DispersionPoint {
    std::int64_t t = 0;
    int componentId = 0;  // smallest node id in the component
    std::int64_t dispersionMs = 0;
};

struct SwarmCountPoint {
    std::int64_t t = 0;
    int count = 0;
};

struct SyncReport {
    std::optional<std::int64_t> timeToSync;
    std::int64_t dispersionTolerance = 0;
    std::vector<DispersionPoint> dispersionSeries;   // one row per component per tick
    std::vector<SwarmCountPoint> swarmCountSeries;   // components of size >= 2 per tick
    std::vector<Event> syncEvents;                   // syncEnter / syncExit only
    bool incomplete = false;                         // log truncated before durationMs
};

// Adoption tolerance plus two one-way latencies: the widest residual shift the
// protocol can leave between two neighbors that both consider each other close
// enough not to adopt.
std::int64_t default_dispersion_tolerance(const ProtocolConfig& cfg, const RadioModel& radio);

// Computes the report from a run. timeToSync is the start of the first window
// of one full period during which every non-faulty node is in sync, all of
// them share one component, and that component's max pairwise circular phase
// dispersion stays within the tolerance. Snapshot phases at one tick are
// simultaneous observations, so no cross-node alignment is needed; use
// aligned_phase() when comparing phases across ticks.
SyncReport measure(const RunResult& result, const Scenario& scenario,
                   std::int64_t dispersionTolerance);
SyncReport measure(const RunResult& result, const Scenario& scenario);

}  // namespace swarmsync

#endif
