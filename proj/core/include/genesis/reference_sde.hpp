#pragma once

#include <cstdint>
#include <string>

#include "genesis/config.hpp"
#include "genesis/model.hpp"
#include "genesis/simulate.hpp"

namespace genesis {

// Literal counter-process simulator: keeps the full indicator vectors
// x^{ji} (one per directed channel) and y^i (one per node) and fires every
// Poisson counter — transmission phase moves, channel absorptions, recovery
// phase moves, recovery absorptions — as its own clock, including no-op
// jumps on inactive states. Quadratically slower than the event-driven
// simulator; intended for small instances as a correctness oracle.
//
// After every jump the state is audited: each x sums to its node's y sum,
// every x and y is a canonical unit vector or zero, infections coincide
// with channel-absorption firings on active phases with susceptible
// targets, and recoveries with exit firings on the active recovery phase.
// A violation throws AuditError with the jump context.
struct ReferenceResult {
  EventLog log;
  long long jumps = 0;          // every counter firing, no-ops included
  long long audit_checks = 0;   // state audits performed (one per jump)
  long long violations = 0;     // always 0 on return; kept for reporting
};

ReferenceResult simulate_reference_sde(const GenesisModel& model,
                                       double horizon, uint64_t seed,
                                       const NumericOptions& opts = default_options());

}  // namespace genesis
