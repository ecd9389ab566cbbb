#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scalefree/common.hpp"
#include "scalefree/netgraph.hpp"
#include "scalefree/protocols.hpp"

namespace scalefree {

/// One synchronous-network experiment. Missing initial states are drawn
/// uniformly from [-1, 1] per coordinate (agents in index order, exosystem
/// last), so a fixed seed fixes the run.
struct SimConfig {
  ProtocolSpec protocol;
  WeightedDigraph graph;
  std::vector<int> rootset;  // kind 4 only, 0-based node indices
  int horizon = 100;
  std::optional<std::vector<Vector>> initial_states;
  std::optional<Vector> exo_initial;  // kind 4: exosystem state at k = 0
  std::uint64_t seed = 0;
  bool allow_unverified = false;  // skip the structural graph admission check
};

/// Everything observable about a run, one entry per step k = 0..horizon.
/// Controller memory and the exosystem state are recorded so closed-loop
/// matrix models can be replayed against the trace.
struct Trace {
  ProtocolKind kind;
  int horizon = 0;
  std::vector<std::vector<Vector>> x;                // [k][agent]
  std::vector<std::vector<Vector>> y;                // [k][agent]
  std::vector<std::vector<Vector>> u;                // [k][agent]
  std::vector<std::vector<Vector>> zeta;             // [k][agent] coupling signal
  std::vector<std::vector<ControllerState>> controller;  // [k][agent]
  std::vector<Vector> exo;          // [k], kind 4 only
  std::vector<double> y_ref;        // [k], kind 4 only
  std::vector<double> disagreement;      // [k] max pairwise gap
  std::vector<double> regulation_error;  // [k], kind 4 only

  int agent_count() const {
    return x.empty() ? 0 : static_cast<int>(x.front().size());
  }
};

/// Decay statistics of a nonnegative series.
struct Metrics {
  double initial = 0.0;
  double final_value = 0.0;
  int settled_step = -1;       // first k with value < tol, -1 if never
  double decay_rate = 0.0;     // least-squares slope of log(value) over the
                               // last half, positive samples only
  bool identically_zero = false;
};

Metrics compute_metrics(const std::vector<double>& series, double tol = 1e-8);

/// zeta_i = sum_j d_ij (v_i - v_j), computed agent by agent and cross-checked
/// against the stacked form v - (D (x) I) v; disagreement beyond
/// 1e-12 * scale raises ConsistencyError.
std::vector<Vector> network_signals(const Matrix& d, const std::vector<Vector>& values);

/// Rooted variant zbar_i = v_i - sum_j dbar_ij v_j, cross-checked against
/// (2 + din_i)^-1 sum_j lbar_ij v_j.
std::vector<Vector> rooted_signals(const RootedNetworkMatrices& nets,
                                   const std::vector<Vector>& values);

/// Paired coupling signals of the regulated protocol.
struct RegulatedSignals {
  std::vector<Vector> zetabar;    // outputs measured against the reference
  std::vector<Vector> zetacheck;  // broadcast controller variables
};

/// zetabar_i = (y_i - y_ref) - sum_j dbar_ij (y_j - y_ref) and
/// zetacheck_i = rho_i - sum_j dbar_ij rho_j, both through rooted_signals.
RegulatedSignals regulated_signals(const std::vector<Vector>& y, double y_ref,
                                   const std::vector<Vector>& rho,
                                   const RootedNetworkMatrices& nets);

/// Metrics of the trace's disagreement series.
Metrics metrics(const Trace& trace, double tol = 1e-8);

/// Per-agent initial states, every coordinate uniform in [-1, 1].
std::vector<Vector> random_initial_states(const ProtocolSpec& spec,
                                          int agent_count, UniformRng& rng);

/// Runs the closed loop. Refuses on structural grounds unless
/// allow_unverified: kinds 1-3 need a directed spanning tree, kind 4 needs
/// every node reachable from the root set. Any state magnitude above
/// kDivergenceLimit aborts with DivergedError naming the step.
Trace run(const SimConfig& cfg);

}  // namespace scalefree
