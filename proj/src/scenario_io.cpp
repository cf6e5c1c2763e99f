#include "swarmsync/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace swarmsync {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            bad(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

std::int64_t get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        bad(path, "expected an integer");
    }
    return j.get<std::int64_t>();
}

double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) {
        bad(path, "expected a number");
    }
    return j.get<double>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
        bad(path, "expected a boolean");
    }
    return j.get<bool>();
}

}  // namespace

const char* variant_name(ProtocolVariant variant) {
    return variant == ProtocolVariant::fireAtZero ? "fireAtZero" : "main";
}

const char* fault_kind_name(FaultKind kind) {
    switch (kind) {
        case FaultKind::randomPhase: return "randomPhase";
        case FaultKind::stuckPhase: return "stuckPhase";
        case FaultKind::floodZero: return "floodZero";
    }
    return "?";
}

Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        bad("scenario", "expected a JSON object");
    }
    check_keys(j, "", {"protocolVariant", "config", "nodes", "trace", "radio", "faults", "seed",
                       "durationMs", "tickMs"});
    Scenario s;

    if (j.contains("protocolVariant")) {
        if (!j["protocolVariant"].is_string()) {
            bad("protocolVariant", "expected a string");
        }
        const std::string v = j["protocolVariant"].get<std::string>();
        if (v == "main") {
            s.variant = ProtocolVariant::mainProtocol;
        } else if (v == "fireAtZero") {
            s.variant = ProtocolVariant::fireAtZero;
        } else {
            bad("protocolVariant", "must be \"main\" or \"fireAtZero\"");
        }
    }

    if (j.contains("config")) {
        const json& c = j["config"];
        if (!c.is_object()) {
            bad("config", "expected an object");
        }
        check_keys(c, "config",
                   {"period", "hiAmplitude", "loAmplitude", "allowedPhaseShift", "expectedLatency",
                    "timeToOutOfSync", "broadcastInterval", "addressCount", "redrawInterval"});
        if (c.contains("period")) s.config.period = get_int(c["period"], "config.period");
        if (c.contains("hiAmplitude"))
            s.config.hiAmplitude = get_num(c["hiAmplitude"], "config.hiAmplitude");
        if (c.contains("loAmplitude"))
            s.config.loAmplitude = get_num(c["loAmplitude"], "config.loAmplitude");
        if (c.contains("allowedPhaseShift"))
            s.config.allowedPhaseShift = get_int(c["allowedPhaseShift"], "config.allowedPhaseShift");
        if (c.contains("expectedLatency"))
            s.config.expectedLatency = get_int(c["expectedLatency"], "config.expectedLatency");
        if (c.contains("timeToOutOfSync"))
            s.config.timeToOutOfSync = get_int(c["timeToOutOfSync"], "config.timeToOutOfSync");
        if (c.contains("broadcastInterval"))
            s.config.broadcastInterval = get_int(c["broadcastInterval"], "config.broadcastInterval");
        if (c.contains("addressCount"))
            s.config.addressCount =
                static_cast<int>(get_int(c["addressCount"], "config.addressCount"));
        if (c.contains("redrawInterval"))
            s.config.redrawInterval = get_int(c["redrawInterval"], "config.redrawInterval");
    }

    if (j.contains("nodes")) {
        if (!j["nodes"].is_array()) {
            bad("nodes", "expected an array");
        }
        std::size_t i = 0;
        for (const json& nj : j["nodes"]) {
            const std::string at = "nodes[" + std::to_string(i++) + "]";
            if (!nj.is_object()) {
                bad(at, "expected an object");
            }
            check_keys(nj, at, {"id", "nodeNumber", "clockOffset", "initialInSync", "initialPhase"});
            if (!nj.contains("id")) {
                bad(at + ".id", "required");
            }
            NodeSpec node;
            node.id = static_cast<int>(get_int(nj["id"], at + ".id"));
            if (nj.contains("nodeNumber"))
                node.nodeNumber = static_cast<int>(get_int(nj["nodeNumber"], at + ".nodeNumber"));
            if (nj.contains("clockOffset"))
                node.clockOffset = get_int(nj["clockOffset"], at + ".clockOffset");
            if (nj.contains("initialInSync"))
                node.initialInSync = get_bool(nj["initialInSync"], at + ".initialInSync");
            if (nj.contains("initialPhase"))
                node.initialPhase = get_int(nj["initialPhase"], at + ".initialPhase");
            s.nodes.push_back(node);
        }
    }

    if (j.contains("trace")) {
        if (!j["trace"].is_object()) {
            bad("trace", "expected an object keyed by node id");
        }
        for (const auto& [key, wlist] : j["trace"].items()) {
            const std::string at = "trace[" + key + "]";
            int id = 0;
            try {
                std::size_t used = 0;
                id = std::stoi(key, &used);
                if (used != key.size()) {
                    throw std::invalid_argument(key);
                }
            } catch (const std::exception&) {
                bad(at, "key must be a node id");
            }
            if (!wlist.is_array()) {
                bad(at, "expected an array of waypoints");
            }
            std::vector<Waypoint>& wps = s.trace[id];
            std::size_t k = 0;
            for (const json& wj : wlist) {
                const std::string wat = at + "[" + std::to_string(k++) + "]";
                if (!wj.is_object()) {
                    bad(wat, "expected an object");
                }
                check_keys(wj, wat, {"t", "x", "y"});
                for (const char* f : {"t", "x", "y"}) {
                    if (!wj.contains(f)) {
                        bad(wat + "." + f, "required");
                    }
                }
                wps.push_back({get_int(wj["t"], wat + ".t"), get_num(wj["x"], wat + ".x"),
                               get_num(wj["y"], wat + ".y")});
            }
        }
    }

    if (j.contains("radio")) {
        const json& r = j["radio"];
        if (!r.is_object()) {
            bad("radio", "expected an object");
        }
        check_keys(r, "radio", {"range", "latencyMean", "latencyJitter", "lossProbability"});
        if (r.contains("range")) s.radio.range = get_num(r["range"], "radio.range");
        if (r.contains("latencyMean"))
            s.radio.latencyMean = get_int(r["latencyMean"], "radio.latencyMean");
        if (r.contains("latencyJitter"))
            s.radio.latencyJitter = get_int(r["latencyJitter"], "radio.latencyJitter");
        if (r.contains("lossProbability"))
            s.radio.lossProbability = get_num(r["lossProbability"], "radio.lossProbability");
    }

    if (j.contains("faults")) {
        if (!j["faults"].is_array()) {
            bad("faults", "expected an array");
        }
        std::size_t i = 0;
        for (const json& fj : j["faults"]) {
            const std::string at = "faults[" + std::to_string(i++) + "]";
            if (!fj.is_object()) {
                bad(at, "expected an object");
            }
            check_keys(fj, at, {"nodeId", "kind", "startTime", "endTime", "stuckPhase"});
            for (const char* f : {"nodeId", "kind", "startTime", "endTime"}) {
                if (!fj.contains(f)) {
                    bad(at + "." + f, "required");
                }
            }
            FaultSpec fault;
            fault.nodeId = static_cast<int>(get_int(fj["nodeId"], at + ".nodeId"));
            if (!fj["kind"].is_string()) {
                bad(at + ".kind", "expected a string");
            }
            const std::string kind = fj["kind"].get<std::string>();
            if (kind == "randomPhase") {
                fault.kind = FaultKind::randomPhase;
            } else if (kind == "stuckPhase") {
                fault.kind = FaultKind::stuckPhase;
            } else if (kind == "floodZero") {
                fault.kind = FaultKind::floodZero;
            } else {
                bad(at + ".kind", "must be randomPhase, stuckPhase or floodZero");
            }
            fault.startTime = get_int(fj["startTime"], at + ".startTime");
            fault.endTime = get_int(fj["endTime"], at + ".endTime");
            if (fj.contains("stuckPhase"))
                fault.stuckPhase = get_int(fj["stuckPhase"], at + ".stuckPhase");
            s.faults.push_back(fault);
        }
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            bad("seed", "expected an unsigned integer");
        }
        if (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
            j["seed"].get<std::int64_t>() < 0) {
            bad("seed", "must be >= 0");
        }
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("durationMs")) s.durationMs = get_int(j["durationMs"], "durationMs");
    if (j.contains("tickMs")) s.tickMs = get_int(j["tickMs"], "tickMs");
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot read file: " + path);
    }
    json j = json::parse(in);  // parse_error carries the byte offset
    return scenario_from_json(j);
}

nlohmann::ordered_json scenario_to_json(const Scenario& scenario) {
    ordered_json j;
    j["protocolVariant"] = variant_name(scenario.variant);
    ordered_json c;
    c["period"] = scenario.config.period;
    c["hiAmplitude"] = scenario.config.hiAmplitude;
    c["loAmplitude"] = scenario.config.loAmplitude;
    c["allowedPhaseShift"] = scenario.config.allowedPhaseShift;
    c["expectedLatency"] = scenario.config.expectedLatency;
    c["timeToOutOfSync"] = scenario.config.timeToOutOfSync;
    c["broadcastInterval"] = scenario.config.broadcastInterval;
    c["addressCount"] = scenario.config.addressCount;
    c["redrawInterval"] = scenario.config.redrawInterval;
    j["config"] = std::move(c);
    j["nodes"] = ordered_json::array();
    for (const NodeSpec& node : scenario.nodes) {
        ordered_json nj;
        nj["id"] = node.id;
        if (node.nodeNumber) nj["nodeNumber"] = *node.nodeNumber;
        if (node.clockOffset) nj["clockOffset"] = *node.clockOffset;
        nj["initialInSync"] = node.initialInSync;
        if (node.initialPhase) nj["initialPhase"] = *node.initialPhase;
        j["nodes"].push_back(std::move(nj));
    }
    j["trace"] = ordered_json::object();
    for (const auto& [id, wps] : scenario.trace) {
        ordered_json arr = ordered_json::array();
        for (const Waypoint& w : wps) {
            arr.push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}});
        }
        j["trace"][std::to_string(id)] = std::move(arr);
    }
    ordered_json r;
    r["range"] = scenario.radio.range;
    r["latencyMean"] = scenario.radio.latencyMean;
    r["latencyJitter"] = scenario.radio.latencyJitter;
    r["lossProbability"] = scenario.radio.lossProbability;
    j["radio"] = std::move(r);
    j["faults"] = ordered_json::array();
    for (const FaultSpec& f : scenario.faults) {
        ordered_json fj;
        fj["nodeId"] = f.nodeId;
        fj["kind"] = fault_kind_name(f.kind);
        fj["startTime"] = f.startTime;
        fj["endTime"] = f.endTime;
        if (f.stuckPhase) fj["stuckPhase"] = *f.stuckPhase;
        j["faults"].push_back(std::move(fj));
    }
    j["seed"] = scenario.seed;
    j["durationMs"] = scenario.durationMs;
    j["tickMs"] = scenario.tickMs;
    return j;
}

std::string scenario_to_string(const Scenario& scenario) {
    return scenario_to_json(scenario).dump(2) + "\n";
}

std::string events_to_ndjson(std::span<const Event> events) {
    std::string out;
    out.reserve(events.size() * 72);
    for (const Event& e : events) {
        ordered_json j;
        j["t"] = e.t;
        j["kind"] = event_kind_name(e.kind);
        j["nodeId"] = e.nodeId;
        j["phase"] = e.phase;
        j["address"] = e.address;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string snapshots_to_ndjson(std::span<const SnapshotRow> snapshots) {
    std::string out;
    out.reserve(snapshots.size() * 110);
    for (const SnapshotRow& s : snapshots) {
        ordered_json j;
        j["t"] = s.t;
        j["nodeId"] = s.nodeId;
        j["x"] = s.x;
        j["y"] = s.y;
        j["inSync"] = s.inSync;
        j["phase"] = s.phase;
        j["address"] = s.address;
        j["amplitude"] = s.amplitude;
        out += j.dump();
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json report_to_json(const SyncReport& report) {
    ordered_json j;
    if (report.timeToSync) {
        j["timeToSyncMs"] = *report.timeToSync;
    } else {
        j["timeToSyncMs"] = nullptr;
    }
    j["dispersionToleranceMs"] = report.dispersionTolerance;
    j["incomplete"] = report.incomplete;
    ordered_json counts = ordered_json::array();
    for (const SwarmCountPoint& p : report.swarmCountSeries) {
        counts.push_back({p.t, p.count});
    }
    j["swarmCountSeries"] = std::move(counts);
    ordered_json disp = ordered_json::array();
    for (const DispersionPoint& p : report.dispersionSeries) {
        disp.push_back({p.t, p.componentId, p.dispersionMs});
    }
    j["dispersionSeries"] = std::move(disp);
    ordered_json evs = ordered_json::array();
    for (const Event& e : report.syncEvents) {
        ordered_json ej;
        ej["t"] = e.t;
        ej["kind"] = event_kind_name(e.kind);
        ej["nodeId"] = e.nodeId;
        ej["phase"] = e.phase;
        ej["address"] = e.address;
        evs.push_back(std::move(ej));
    }
    j["syncEvents"] = std::move(evs);
    return j;
}

std::string report_to_string(const SyncReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

std::string dispersion_series_csv(const SyncReport& report) {
    std::string out = "t_ms,component_id,dispersion_ms\n";
    for (const DispersionPoint& p : report.dispersionSeries) {
        out += std::to_string(p.t);
        out += ',';
        out += std::to_string(p.componentId);
        out += ',';
        out += std::to_string(p.dispersionMs);
        out += '\n';
    }
    return out;
}

}  // namespace swarmsync
