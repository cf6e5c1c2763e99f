#include "swarmsync/addressing.hpp"

#include <stdexcept>
#include <string>

namespace swarmsync {

int draw_node_number(Rng& rng, int n) {
    if (n < 2) {
        throw std::invalid_argument("addressCount must be >= 2, got " + std::to_string(n));
    }
    return static_cast<int>(rng.uniform_int(1, n));
}

AddressAssignment assignment_for(int nodeNumber, int n) {
    if (nodeNumber < 1 || nodeNumber > n) {
        throw std::out_of_range("nodeNumber " + std::to_string(nodeNumber) +
                                " outside {1.." + std::to_string(n) + "}");
    }
    AddressAssignment a;
    a.nodeNumber = nodeNumber;
    a.broadcastAddress = nodeNumber;
    for (int i = 1; i <= n; ++i) {
        if (i != nodeNumber) {
            a.listenAddresses.insert(i);
        }
    }
    return a;
}

bool can_hear(const AddressAssignment& sender, const AddressAssignment& receiver) {
    return receiver.listenAddresses.count(sender.broadcastAddress) > 0;
}

bool maybe_redraw(NodeState& state, std::int64_t now, Rng& rng, const ProtocolConfig& cfg) {
    if (state.inSync || now - state.lastRedrawTime < cfg.redrawInterval) {
        return false;
    }
    state.nodeNumber = draw_node_number(rng, cfg.addressCount);
    state.lastRedrawTime = now;
    return true;
}

}  // namespace swarmsync
