#ifndef SWARMSYNC_SCENARIO_IO_HPP
#define SWARMSYNC_SCENARIO_IO_HPP

#include <span>
#include <string>

#include "json.hpp"
#include "swarmsync/metrics.hpp"
#include "swarmsync/netsim.hpp"

namespace swarmsync {

const char* variant_name(ProtocolVariant variant);
const char* fault_kind_name(FaultKind kind);

// Strict scenario schema: unknown or wrongly typed fields throw
// std::runtime_error naming the offending path. JSON syntax errors from a file
// surface as nlohmann::json::parse_error (with a byte offset).
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

nlohmann::ordered_json scenario_to_json(const Scenario& scenario);
std::string scenario_to_string(const Scenario& scenario);

// One JSON object per line: {"t":..,"kind":..,"nodeId":..,"phase":..,"address":..}
std::string events_to_ndjson(std::span<const Event> events);
std::string snapshots_to_ndjson(std::span<const SnapshotRow> snapshots);

nlohmann::ordered_json report_to_json(const SyncReport& report);
std::string report_to_string(const SyncReport& report);

// Per-tick per-component dispersion rows; the swarm count at a tick is its
// number of rows there.
std::string dispersion_series_csv(const SyncReport& report);

}  // namespace swarmsync

#endif
