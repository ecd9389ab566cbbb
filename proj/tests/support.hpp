#pragma once

#include <utility>
#include <vector>

#include "scalefree/common.hpp"
#include "scalefree/netgraph.hpp"

namespace testsupport {

/// Random digraph that contains a directed spanning tree rooted at node 0:
/// node i > 0 receives one edge from a random earlier node, then up to
/// `extra_edges` additional random edges are sprinkled in (skipping
/// self-loops and already-present edges).
inline scalefree::WeightedDigraph random_tree_digraph(scalefree::UniformRng& rng,
                                                      int n, int extra_edges) {
  scalefree::Matrix w = scalefree::Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const int parent = rng.below(i);
    w(i, parent) = rng.range(0.1, 2.0);
  }
  for (int t = 0; t < extra_edges; ++t) {
    const int from = rng.below(n);
    const int to = rng.below(n);
    if (from == to || w(to, from) != 0.0) {
      continue;
    }
    w(to, from) = rng.range(0.1, 2.0);
  }
  return scalefree::WeightedDigraph(std::move(w));
}

/// Random (graph, rootset) pair with no structural guarantee: edge density
/// varies per draw so both rooted and unreachable configurations occur.
inline std::pair<scalefree::WeightedDigraph, std::vector<int>>
random_rooted_pair(scalefree::UniformRng& rng, int n) {
  const double density = rng.range(0.05, 0.5);
  scalefree::Matrix w = scalefree::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.unit() < density) {
        w(i, j) = rng.range(0.1, 2.0);
      }
    }
  }
  std::vector<int> rootset;
  for (int i = 0; i < n; ++i) {
    if (rng.unit() < 0.3) {
      rootset.push_back(i);
    }
  }
  if (rootset.empty()) {
    rootset.push_back(rng.below(n));
  }
  return {scalefree::WeightedDigraph(std::move(w)), std::move(rootset)};
}

/// Kronecker product written out by hand, kept independent of the library's
/// block assembly so the two routes can disagree in tests.
inline scalefree::Matrix kron(const scalefree::Matrix& a,
                              const scalefree::Matrix& b) {
  scalefree::Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace testsupport
