#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scalefree/common.hpp"
#include "scalefree/netgraph.hpp"
#include "scalefree/protocols.hpp"
#include "scalefree/sim.hpp"

namespace scalefree {

/// Exact matrix model of one closed loop: M advances the stacked run state,
/// T maps it into proof coordinates, and Mt is the block upper-triangular
/// dynamics those coordinates obey. T M = Mt T up to roundoff; the residual
/// is recorded, never hidden.
///
/// Stacked state order matches what oracle_compare reads off a Trace:
/// kinds 1-2: (x_1..x_N, eta_1..eta_N[, xhat_1..xhat_N]);
/// kinds 3-4: (x_all, xi_all, xhat_all, eta_all[, x_r]).
struct ClosedLoopModel {
  ProtocolKind kind;
  Matrix M;
  Matrix T;
  Matrix Mt;
  std::vector<std::pair<std::string, Matrix>> diagonal_blocks;
  double triangularization_residual = 0.0;  // ||T M - Mt T||_inf
};

/// Builds the model for a spec on a concrete graph. Purely algebraic: no
/// structural admission here, so certified-unstable designs can still be
/// modeled. Kind 4 needs the root set.
ClosedLoopModel assemble(const ProtocolSpec& spec, const WeightedDigraph& graph,
                         const std::vector<int>& rootset = {});

/// Max deviation ||M^k s(0) - s(k)||_inf over the trace, with s(k) stacked
/// from the recorded states: matrix-power iteration against the modular
/// simulator. Throws DimensionError when the trace does not fit the model.
double oracle_compare(const ClosedLoopModel& model, const Trace& trace);

/// Outcome of the synchronization check. A structural refusal (graph not
/// admissible) is distinct from a certified-unstable verdict: the former
/// leaves certified false with a reason, the latter reports the offending
/// block radius.
struct SyncCertificate {
  bool structural_ok = false;
  std::string refusal_reason;  // empty when structural_ok
  bool certified = false;      // every diagonal block strictly Schur
  double spectral_radius = 0.0;  // max over diagonal block radii
  std::vector<std::pair<std::string, double>> block_radii;
};

SyncCertificate certify_synchronization(const ProtocolSpec& spec,
                                        const WeightedDigraph& graph,
                                        const std::vector<int>& rootset = {});

/// Convenience overloads that pull the spec, graph and rootset out of a run
/// configuration. The oracle_compare overload simulates `steps` steps with
/// the config's seed and allow_unverified left as given, then replays the
/// trace through the assembled model.
ClosedLoopModel assemble(const SimConfig& cfg);
double oracle_compare(const SimConfig& cfg, int steps);
SyncCertificate certify_synchronization(const SimConfig& cfg);

}  // namespace scalefree
