// Cross-checks the library against an independent flat transcription of the
// node loop: first step-by-step on randomized schedules, then a full 3-node
// network replayed tick-for-tick outside the engine.
#include <cstdint>
#include <deque>
#include <vector>

#include "doctest.h"
#include "flat_reference.hpp"
#include "swarmsync/netsim.hpp"
#include "swarmsync/protocol.hpp"
#include "swarmsync/rng.hpp"

using namespace swarmsync;
using flatref::FlatOut;
using flatref::FlatState;
using flatref::flat_step;

TEST_CASE("library node loop matches the flat transcription on random schedules") {
    const ProtocolConfig cfg;
    for (std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        CAPTURE(seed);
        Rng schedule(seed);
        NodeState lib;
        lib.nodeNumber = 4;
        lib.lastReceiveTime = -cfg.timeToOutOfSync;  // start out of sync
        FlatState flat;
        flat.number = 4;
        flat.lastReceiveTime = -cfg.timeToOutOfSync;

        long long now = 0;
        for (int step = 0; step < 20000; ++step) {
            now += schedule.uniform_int(1, 300);
            std::vector<PhaseMessage> inbox;
            const int count = static_cast<int>(schedule.uniform_int(0, 3));
            for (int k = 0; k < count; ++k) {
                inbox.push_back({schedule.uniform_int(-10, cfg.period + 10),
                                 static_cast<int>(schedule.uniform_int(1, 6))});
            }

            const StepOutput libOut = node_step(lib, now, inbox, cfg);
            const FlatOut flatOut = flat_step(flat, now, inbox, cfg);

            REQUIRE(lib.inSync == flat.inSync);
            REQUIRE(lib.phase == flat.phase);
            REQUIRE(lib.lastTimeCheck == flat.lastTimeCheck);
            REQUIRE(lib.lastReceiveTime == flat.lastReceiveTime);
            REQUIRE(lib.lastBroadcastTime == flat.lastBroadcastTime);
            REQUIRE(lib.malformedCount == flat.malformed);
            REQUIRE(libOut.broadcast.has_value() == flatOut.hasBroadcast);
            if (libOut.broadcast) {
                REQUIRE(libOut.broadcast->phase == flatOut.bcPhase);
                REQUIRE(libOut.broadcast->senderAddress == flatOut.bcAddr);
            }
            REQUIRE(libOut.adoptions.size() == flatOut.adoptions.size());
            for (std::size_t k = 0; k < flatOut.adoptions.size(); ++k) {
                REQUIRE(libOut.adoptions[k].newPhase == flatOut.adoptions[k].first);
                REQUIRE(libOut.adoptions[k].fromAddress == flatOut.adoptions[k].second);
            }
            REQUIRE(libOut.amplitude == doctest::Approx(flatOut.amplitude).epsilon(1e-12));
        }
    }
}

TEST_CASE("engine run matches an external tick-for-tick replay") {
    // Three stationary nodes, all pairwise in range, distinct numbers, pinned
    // starts with very different clock offsets. Deterministic radio.
    Scenario sc;
    sc.durationMs = 30000;
    sc.seed = 12;
    const int numbers[3] = {1, 2, 3};
    const std::int64_t phases[3] = {2000, 700, 1400};
    const std::int64_t offsets[3] = {1699, 350, 4242};
    for (int i = 0; i < 3; ++i) {
        NodeSpec n;
        n.id = i;
        n.nodeNumber = numbers[i];
        n.clockOffset = offsets[i];
        n.initialInSync = true;
        n.initialPhase = phases[i];
        sc.nodes.push_back(n);
    }
    sc.trace[0] = {{0, 0.0, 0.0}};
    sc.trace[1] = {{0, 10.0, 0.0}};
    sc.trace[2] = {{0, 5.0, 8.0}};

    const RunResult result = run(sc);
    REQUIRE(result.inits.size() == 3);

    // Replay preconditions: the run must never leave the deterministic regime.
    for (const Event& e : result.events) {
        REQUIRE(e.kind != EventKind::redraw);
        REQUIRE(e.kind != EventKind::syncExit);
        REQUIRE(e.kind != EventKind::drop);
    }

    struct Row {
        std::int64_t t;
        int nodeId;
        std::int64_t phase;
        int address;
    };
    std::vector<Row> engineSends;
    std::vector<Row> engineAdopts;
    for (const Event& e : result.events) {
        if (e.kind == EventKind::send) {
            engineSends.push_back({e.t, e.nodeId, e.phase, e.address});
        } else if (e.kind == EventKind::adopt) {
            engineAdopts.push_back({e.t, e.nodeId, e.phase, e.address});
        }
    }

    // External replay with the flat step and a plain FIFO delivery queue.
    FlatState st[3];
    for (int i = 0; i < 3; ++i) {
        const NodeInit& init = result.inits[i];
        REQUIRE(init.nodeId == i);
        REQUIRE(init.nodeNumber == numbers[i]);
        REQUIRE(init.clockOffset == offsets[i]);
        st[i].inSync = true;
        st[i].phase = init.initialPhase;
        st[i].lastTimeCheck = init.clockOffset;
        st[i].lastReceiveTime = init.clockOffset;
        st[i].lastBroadcastTime = init.clockOffset - init.broadcastStagger;
        st[i].number = init.nodeNumber;
    }
    struct Delivery {
        std::int64_t time;
        int receiver;
        PhaseMessage msg;
    };
    std::deque<Delivery> pending;
    std::vector<Row> replaySends;
    std::vector<Row> replayAdopts;
    std::size_t snapIdx = 0;

    for (std::int64_t t = 0; t < sc.durationMs; ++t) {
        std::vector<PhaseMessage> inbox[3];
        while (!pending.empty() && pending.front().time <= t) {
            inbox[pending.front().receiver].push_back(pending.front().msg);
            pending.pop_front();
        }
        for (int i = 0; i < 3; ++i) {
            const FlatOut out = flat_step(st[i], t + offsets[i], inbox[i], sc.config);
            for (const auto& [newPhase, fromAddr] : out.adoptions) {
                replayAdopts.push_back({t, i, newPhase, fromAddr});
            }
            if (out.hasBroadcast) {
                replaySends.push_back({t, i, out.bcPhase, out.bcAddr});
                for (int j = 0; j < 3; ++j) {
                    if (j != i) {
                        pending.push_back(
                            {t + sc.radio.latencyMean, j, {out.bcPhase, out.bcAddr}});
                    }
                }
            }
            // Snapshots are interleaved per tick in ascending node order.
            REQUIRE(snapIdx < result.snapshots.size());
            const SnapshotRow& snap = result.snapshots[snapIdx++];
            REQUIRE(snap.t == t);
            REQUIRE(snap.nodeId == i);
            REQUIRE(snap.inSync == st[i].inSync);
            REQUIRE(snap.phase == st[i].phase);
            REQUIRE(snap.address == st[i].number);
            REQUIRE(snap.amplitude == doctest::Approx(out.amplitude).epsilon(1e-12));
        }
    }
    REQUIRE(snapIdx == result.snapshots.size());

    auto sameRows = [](const std::vector<Row>& a, const std::vector<Row>& b) {
        if (a.size() != b.size()) {
            return false;
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k].t != b[k].t || a[k].nodeId != b[k].nodeId || a[k].phase != b[k].phase ||
                a[k].address != b[k].address) {
                return false;
            }
        }
        return true;
    };
    CHECK(sameRows(engineSends, replaySends));
    CHECK(sameRows(engineAdopts, replayAdopts));
    CHECK(replaySends.size() > 100);  // the comparison actually exercised traffic
}
