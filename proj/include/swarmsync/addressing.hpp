#ifndef SWARMSYNC_ADDRESSING_HPP
#define SWARMSYNC_ADDRESSING_HPP

#include <set>

#include "swarmsync/protocol.hpp"
#include "swarmsync/rng.hpp"

namespace swarmsync {

// One node's slice of the N-address scheme: broadcast on your own number,
// listen on the other N-1 addresses.
struct AddressAssignment {
    int nodeNumber = 1;
    int broadcastAddress = 1;
    std::set<int> listenAddresses;
};

// Uniform draw from {1..n}. Throws std::invalid_argument for n < 2.
int draw_node_number(Rng& rng, int n);

// Builds the assignment for a node number. Throws std::out_of_range when
// nodeNumber is outside {1..n}.
AddressAssignment assignment_for(int nodeNumber, int n);

// True iff the receiver listens where the sender broadcasts, i.e. the node
// numbers differ. Symmetric; false for a node and itself.
bool can_hear(const AddressAssignment& sender, const AddressAssignment& receiver);

// Out-of-sync nodes resample their number every redrawInterval (possibly to
// the same value); in-sync nodes keep theirs. Returns whether a redraw ran.
bool maybe_redraw(NodeState& state, std::int64_t now, Rng& rng, const ProtocolConfig& cfg);

}  // namespace swarmsync

#endif
