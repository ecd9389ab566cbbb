#pragma once

#include <string>
#include <vector>

#include "scalefree/common.hpp"

namespace scalefree {

/// Weighted directed communication topology on n agents. Entry (i, j) of
/// weights() is a_ij, the weight of the edge j -> i (information flowing
/// from agent j into agent i). Node indices are 0-based throughout the
/// library; the file format uses 1-based indices and converts on load.
class WeightedDigraph {
 public:
  /// Zero-node placeholder, so configs can be assembled incrementally
  /// before the real topology is loaded.
  WeightedDigraph() : weights_(0, 0) {}

  /// Validates: square, all entries >= 0, zero diagonal.
  explicit WeightedDigraph(Matrix weights);

  int size() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }

 private:
  Matrix weights_;
};

/// Graph Laplacian: l_ii = sum_k a_ik, l_ij = -a_ij for i != j. Row sums
/// vanish by construction.
Matrix laplacian(const WeightedDigraph& g);

/// Weighted in-degrees d_in(i) = sum_j a_ij.
Vector in_degrees(const WeightedDigraph& g);

struct NetworkMatrices {
  Matrix L;       // Laplacian
  Matrix Din;     // diag(d_in(i))
  Matrix D;       // row stochastic, D = I - (I+Din)^-1 L
  Matrix Dtilde;  // (n-1)x(n-1) reduction of D; 0x0 when n = 1
};

/// All derived network matrices. Off-diagonal d_ij = a_ij / (1 + d_in(i));
/// the diagonal is d_ii = 1 - sum_{j != i} d_ij so each row sums to one by
/// construction, and d_ii > 0 always holds.
NetworkMatrices row_stochastic(const WeightedDigraph& g);

/// D with the last row subtracted from the others and then truncated:
/// dtilde_ij = d_ij - d_nj for i, j in {0..n-2}. Its eigenvalues are those
/// of D with one eigenvalue 1 removed. Rejects 1x1 input.
Matrix reduced_matrix(const Matrix& d);

/// True iff some node reaches every node along directed edges (breadth-first
/// search; no spectral shortcut).
bool has_spanning_tree(const WeightedDigraph& g);

struct RootedNetworkMatrices {
  std::vector<int> rootset;  // 0-based
  Matrix Lbar;               // L + diag(1 if i in rootset else 0)
  Matrix Dbar;               // I - (2I + Din)^-1 Lbar
  Vector din;                // weighted in-degrees, kept for signal scaling
  bool rooted = false;       // every node reachable from some root
};

/// Expanded Laplacian and its row-substochastic companion for a root set,
/// plus the reachability predicate the regulated protocols require.
/// Rejects an empty root set; indices must be valid and distinct.
RootedNetworkMatrices rooted_networks(const WeightedDigraph& g,
                                      std::vector<int> rootset);

/// True iff max |lambda(m)| < 1 - tol. Eigenvalue non-convergence surfaces
/// as NumericalError, never as false.
bool spectral_radius_in_unit_disk(const Matrix& m, double tol = kUnitDiskTol);

/// Contents of a graph file: `{"n": ..., "edges": [{"from", "to", "weight"},
/// ...]}` plus an optional `"rootset"`. Node indices are 1-based in the file
/// and 0-based here.
struct GraphFile {
  WeightedDigraph graph;
  std::vector<int> rootset;
};

/// Parses the JSON graph format. Unknown keys, bad indices, self-loops, and
/// duplicate edges are ConfigError.
GraphFile parse_graph_file(const std::string& text);

/// Writes the JSON graph format. Weights round-trip bit-exactly through the
/// decimal representation.
std::string format_graph_file(const WeightedDigraph& g,
                              const std::vector<int>& rootset = {});

}  // namespace scalefree
