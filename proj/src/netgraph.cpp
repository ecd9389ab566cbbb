#include "scalefree/netgraph.hpp"

#include <algorithm>
#include <queue>

#include "json_util.hpp"

namespace scalefree {

WeightedDigraph::WeightedDigraph(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() < 1) {
    throw DimensionError("WeightedDigraph: weight matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (weights_(i, i) != 0.0) {
      throw ConfigError("WeightedDigraph: self-loop at node " + std::to_string(i + 1));
    }
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
      if (!(weights_(i, j) >= 0.0)) {
        throw ConfigError("WeightedDigraph: negative or NaN weight at (" +
                          std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      }
    }
  }
}

Vector in_degrees(const WeightedDigraph& g) {
  return g.weights().rowwise().sum();
}

Matrix laplacian(const WeightedDigraph& g) {
  const Matrix& a = g.weights();
  Matrix l = -a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    l(i, i) = a.row(i).sum();
  }
  return l;
}

NetworkMatrices row_stochastic(const WeightedDigraph& g) {
  const int n = g.size();
  const Matrix& a = g.weights();
  NetworkMatrices nm;
  nm.L = laplacian(g);
  const Vector din = in_degrees(g);
  nm.Din = din.asDiagonal();
  nm.D.resize(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      nm.D(i, j) = a(i, j) / (1.0 + din(i));
      off += nm.D(i, j);
    }
    nm.D(i, i) = 1.0 - off;
  }
  nm.Dtilde = (n >= 2) ? reduced_matrix(nm.D) : Matrix(0, 0);
  return nm;
}

Matrix reduced_matrix(const Matrix& d) {
  if (d.rows() != d.cols()) {
    throw DimensionError("reduced_matrix: input must be square");
  }
  const Eigen::Index n = d.rows();
  if (n < 2) {
    throw DimensionError("reduced_matrix: undefined for a single agent");
  }
  Matrix dt(n - 1, n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      dt(i, j) = d(i, j) - d(n - 1, j);
    }
  }
  return dt;
}

namespace {

// Nodes reachable from `sources` along directed edges j -> i (a_ij > 0 means
// j feeds i, so information reaches i from j).
std::vector<bool> reachable_from(const Matrix& a, const std::vector<int>& sources) {
  const int n = static_cast<int>(a.rows());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  for (int s : sources) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = true;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop();
    for (int i = 0; i < n; ++i) {
      if (!seen[static_cast<std::size_t>(i)] && a(i, j) > 0.0) {
        seen[static_cast<std::size_t>(i)] = true;
        frontier.push(i);
      }
    }
  }
  return seen;
}

bool all_reached(const std::vector<bool>& seen) {
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

bool has_spanning_tree(const WeightedDigraph& g) {
  const int n = g.size();
  for (int root = 0; root < n; ++root) {
    if (all_reached(reachable_from(g.weights(), {root}))) {
      return true;
    }
  }
  return false;
}

RootedNetworkMatrices rooted_networks(const WeightedDigraph& g,
                                      std::vector<int> rootset) {
  const int n = g.size();
  if (rootset.empty()) {
    throw ConfigError("rooted_networks: root set must be nonempty");
  }
  std::sort(rootset.begin(), rootset.end());
  if (std::adjacent_find(rootset.begin(), rootset.end()) != rootset.end()) {
    throw ConfigError("rooted_networks: duplicate root index");
  }
  if (rootset.front() < 0 || rootset.back() >= n) {
    throw ConfigError("rooted_networks: root index out of range");
  }

  RootedNetworkMatrices rn;
  rn.rootset = rootset;
  rn.din = in_degrees(g);
  rn.Lbar = laplacian(g);
  for (int r : rootset) {
    rn.Lbar(r, r) += 1.0;
  }
  rn.Dbar.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double scale = 1.0 / (2.0 + rn.din(i));
    for (int j = 0; j < n; ++j) {
      rn.Dbar(i, j) = (i == j ? 1.0 : 0.0) - scale * rn.Lbar(i, j);
    }
  }
  rn.rooted = all_reached(reachable_from(g.weights(), rootset));
  return rn;
}

GraphFile parse_graph_file(const std::string& text) {
  using detail::json;
  const json j = detail::parse_json(text, "graph file");
  detail::require_allowed_keys(j, {"n", "edges", "rootset"}, "graph file");
  const int n = detail::as_int(detail::require_key(j, "n", "graph file"), "n");
  if (n < 1) {
    throw ConfigError("graph file: n must be positive");
  }
  Matrix weights = Matrix::Zero(n, n);
  const json& edges = detail::require_key(j, "edges", "graph file");
  if (!edges.is_array()) {
    throw ConfigError("graph file: 'edges' must be a list");
  }
  for (const json& e : edges) {
    detail::require_allowed_keys(e, {"from", "to", "weight"}, "edge");
    const int from = detail::as_int(detail::require_key(e, "from", "edge"), "from");
    const int to = detail::as_int(detail::require_key(e, "to", "edge"), "to");
    const double w =
        detail::as_number(detail::require_key(e, "weight", "edge"), "weight");
    if (from < 1 || from > n || to < 1 || to > n) {
      throw ConfigError("graph file: edge index out of range (nodes are 1.." +
                        std::to_string(n) + ")");
    }
    if (from == to) {
      throw ConfigError("graph file: self-loop at node " + std::to_string(from));
    }
    if (weights(to - 1, from - 1) != 0.0) {
      throw ConfigError("graph file: duplicate edge " + std::to_string(from) +
                        " -> " + std::to_string(to));
    }
    weights(to - 1, from - 1) = w;
  }
  std::vector<int> rootset;
  if (const auto it = j.find("rootset"); it != j.end()) {
    if (!it->is_array()) {
      throw ConfigError("graph file: 'rootset' must be a list");
    }
    for (const json& r : *it) {
      const int idx = detail::as_int(r, "rootset entry");
      if (idx < 1 || idx > n) {
        throw ConfigError("graph file: root index " + std::to_string(idx) +
                          " out of range");
      }
      rootset.push_back(idx - 1);
    }
  }
  return GraphFile{WeightedDigraph(std::move(weights)), std::move(rootset)};
}

std::string format_graph_file(const WeightedDigraph& g,
                              const std::vector<int>& rootset) {
  using detail::json;
  json j;
  j["n"] = g.size();
  json edges = json::array();
  const Matrix& a = g.weights();
  for (Eigen::Index from = 0; from < a.cols(); ++from) {
    for (Eigen::Index to = 0; to < a.rows(); ++to) {
      if (a(to, from) != 0.0) {
        edges.push_back({{"from", from + 1}, {"to", to + 1}, {"weight", a(to, from)}});
      }
    }
  }
  j["edges"] = std::move(edges);
  if (!rootset.empty()) {
    json roots = json::array();
    for (int r : rootset) {
      roots.push_back(r + 1);
    }
    j["rootset"] = std::move(roots);
  }
  return j.dump(2) + "\n";
}

bool spectral_radius_in_unit_disk(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("spectral_radius_in_unit_disk: matrix must be square");
  }
  if (m.rows() == 0) {
    return true;
  }
  return spectral_radius(m) < 1.0 - tol;
}

}  // namespace scalefree
