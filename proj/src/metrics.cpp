#include "swarmsync/metrics.hpp"

#include <algorithm>
#include <set>

namespace swarmsync {

SwarmPartition detect_swarms(std::span<const SnapshotRow> tickRows, const RadioModel& radio,
                             bool sharedChannel) {
    SwarmPartition part;
    if (tickRows.empty()) {
        return part;
    }
    part.t = tickRows.front().t;
    const std::size_t n = tickRows.size();
    const double r2 = radio.range * radio.range;

    std::vector<int> comp(n, -1);
    int compCount = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] != -1 || !tickRows[i].inSync) {
            continue;
        }
        const int c = compCount++;
        std::vector<std::size_t> stack{i};
        comp[i] = c;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < n; ++b) {
                if (comp[b] != -1 || !tickRows[b].inSync) {
                    continue;
                }
                const double dx = tickRows[a].x - tickRows[b].x;
                const double dy = tickRows[a].y - tickRows[b].y;
                if (dx * dx + dy * dy > r2) {
                    continue;
                }
                if (!sharedChannel && tickRows[a].address == tickRows[b].address) {
                    continue;
                }
                comp[b] = c;
                stack.push_back(b);
            }
        }
    }

    std::vector<std::vector<int>> groups(compCount);
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] != -1) {
            groups[comp[i]].push_back(tickRows[i].nodeId);
        } else {
            part.singletons.push_back(tickRows[i].nodeId);
        }
    }
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
        if (g.size() >= 2) {
            part.components.push_back(std::move(g));
        } else {
            part.singletons.push_back(g.front());
        }
    }
    std::sort(part.components.begin(), part.components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::sort(part.singletons.begin(), part.singletons.end());
    return part;
}

std::int64_t default_dispersion_tolerance(const ProtocolConfig& cfg, const RadioModel& radio) {
    return cfg.allowedPhaseShift + 2 * radio.latencyMean;
}

SyncReport measure(const RunResult& result, const Scenario& scenario,
                   std::int64_t dispersionTolerance) {
    SyncReport report;
    report.dispersionTolerance = dispersionTolerance;
    const bool shared = scenario.variant == ProtocolVariant::fireAtZero;

    std::set<int> faultyIds;
    for (const FaultSpec& f : scenario.faults) {
        faultyIds.insert(f.nodeId);
    }
    std::set<int> trackedIds;
    for (const NodeSpec& nd : scenario.nodes) {
        if (!faultyIds.count(nd.id)) {
            trackedIds.insert(nd.id);
        }
    }

    for (const Event& e : result.events) {
        if (e.kind == EventKind::syncEnter || e.kind == EventKind::syncExit) {
            report.syncEvents.push_back(e);
        }
    }

    const std::size_t n = scenario.nodes.size();
    const std::int64_t tickCount =
        (scenario.durationMs + scenario.tickMs - 1) / scenario.tickMs;
    report.incomplete =
        !result.complete || result.snapshots.size() != static_cast<std::size_t>(tickCount) * n;

    std::int64_t okSince = -1;
    std::size_t i = 0;
    while (i < result.snapshots.size()) {
        const std::int64_t t = result.snapshots[i].t;
        std::size_t j = i;
        while (j < result.snapshots.size() && result.snapshots[j].t == t) {
            ++j;
        }
        const std::span<const SnapshotRow> rows(result.snapshots.data() + i, j - i);
        const SwarmPartition part = detect_swarms(rows, scenario.radio, shared);
        report.swarmCountSeries.push_back({t, static_cast<int>(part.components.size())});

        const std::int64_t period = scenario.config.period;
        bool tracked_ok = false;
        for (const auto& component : part.components) {
            std::int64_t dispersion = 0;
            for (std::size_t a = 0; a < rows.size(); ++a) {
                if (!std::binary_search(component.begin(), component.end(), rows[a].nodeId)) {
                    continue;
                }
                for (std::size_t b = a + 1; b < rows.size(); ++b) {
                    if (!std::binary_search(component.begin(), component.end(),
                                            rows[b].nodeId)) {
                        continue;
                    }
                    dispersion = std::max(
                        dispersion, compute_phase_shift(rows[a].phase, rows[b].phase, period));
                }
            }
            report.dispersionSeries.push_back({t, component.front(), dispersion});
            if (component.size() == trackedIds.size() &&
                std::equal(component.begin(), component.end(), trackedIds.begin()) &&
                dispersion <= dispersionTolerance) {
                tracked_ok = true;
            }
        }

        if (tracked_ok) {
            if (okSince < 0) {
                okSince = t;
            }
            if (!report.timeToSync && t - okSince + scenario.tickMs >= scenario.config.period) {
                report.timeToSync = okSince;
            }
        } else {
            okSince = -1;
        }
        i = j;
    }
    return report;
}

SyncReport measure(const RunResult& result, const Scenario& scenario) {
    return measure(result, scenario, default_dispersion_tolerance(scenario.config, scenario.radio));
}

}  // namespace swarmsync
