#include "scalefree/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scalefree {

Metrics compute_metrics(const std::vector<double>& series, double tol) {
  if (series.empty()) {
    throw ConfigError("compute_metrics: series is empty");
  }
  Metrics m;
  m.initial = series.front();
  m.final_value = series.back();
  m.identically_zero =
      std::all_of(series.begin(), series.end(), [](double v) { return v == 0.0; });
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series[k] < tol) {
      m.settled_step = static_cast<int>(k);
      break;
    }
  }
  // Log-linear fit over the samples still above a floor relative to the
  // start; once a contracting series reaches roundoff it plateaus, and
  // fitting the plateau would report noise instead of the transient rate.
  const double floor = m.initial > 0.0 ? m.initial * 1e-14 : 0.0;
  double sk = 0.0, sl = 0.0, skk = 0.0, skl = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series[k] <= 0.0 || series[k] <= floor) continue;
    const double kk = static_cast<double>(k);
    const double ll = std::log(series[k]);
    sk += kk;
    sl += ll;
    skk += kk * kk;
    skl += kk * ll;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * skk - sk * sk;
    if (denom > 0.0) {
      m.decay_rate = (count * skl - sk * sl) / denom;
    }
  }
  return m;
}

namespace {

Eigen::Index common_dim(const std::vector<Vector>& values, const char* what) {
  if (values.empty()) {
    throw DimensionError(std::string(what) + ": no values supplied");
  }
  const Eigen::Index dim = values.front().size();
  for (const Vector& v : values) {
    if (v.size() != dim) {
      throw DimensionError(std::string(what) + ": value dimensions disagree");
    }
  }
  return dim;
}

void cross_check(const std::vector<Vector>& primary,
                 const std::vector<Vector>& alternate, const char* what) {
  double scale = 1.0;
  double gap = 0.0;
  for (std::size_t i = 0; i < primary.size(); ++i) {
    scale = std::max(scale, primary[i].cwiseAbs().maxCoeff());
    gap = std::max(gap, (primary[i] - alternate[i]).cwiseAbs().maxCoeff());
  }
  if (gap > 1e-12 * scale) {
    throw ConsistencyError(std::string(what) +
                           ": agentwise and stacked forms disagree by " +
                           std::to_string(gap));
  }
}

}  // namespace

std::vector<Vector> network_signals(const Matrix& d,
                                    const std::vector<Vector>& values) {
  const Eigen::Index n = d.rows();
  if (static_cast<Eigen::Index>(values.size()) != n) {
    throw DimensionError("network_signals: need one value per node");
  }
  const Eigen::Index dim = common_dim(values, "network_signals");
  std::vector<Vector> agentwise(values.size());
  std::vector<Vector> stacked(values.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector acc = Vector::Zero(dim);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      acc += d(i, j) * (values[i] - values[j]);
    }
    agentwise[i] = acc;
    Vector s = (1.0 - d(i, i)) * values[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      s -= d(i, j) * values[j];
    }
    stacked[i] = s;
  }
  cross_check(agentwise, stacked, "network_signals");
  return agentwise;
}

std::vector<Vector> rooted_signals(const RootedNetworkMatrices& nets,
                                   const std::vector<Vector>& values) {
  const Eigen::Index n = nets.Dbar.rows();
  if (static_cast<Eigen::Index>(values.size()) != n) {
    throw DimensionError("rooted_signals: need one value per node");
  }
  const Eigen::Index dim = common_dim(values, "rooted_signals");
  std::vector<Vector> primary(values.size());
  std::vector<Vector> alternate(values.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector acc = values[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      acc -= nets.Dbar(i, j) * values[j];
    }
    primary[i] = acc;
    Vector alt = Vector::Zero(dim);
    for (Eigen::Index j = 0; j < n; ++j) {
      alt += nets.Lbar(i, j) * values[j];
    }
    alternate[i] = alt / (2.0 + nets.din(i));
  }
  cross_check(primary, alternate, "rooted_signals");
  return primary;
}

RegulatedSignals regulated_signals(const std::vector<Vector>& y, double y_ref,
                                   const std::vector<Vector>& rho,
                                   const RootedNetworkMatrices& nets) {
  std::vector<Vector> ybar = y;
  for (Vector& v : ybar) {
    v.array() -= y_ref;
  }
  RegulatedSignals out;
  out.zetabar = rooted_signals(nets, ybar);
  out.zetacheck = rooted_signals(nets, rho);
  return out;
}

Metrics metrics(const Trace& trace, double tol) {
  return compute_metrics(trace.disagreement, tol);
}

std::vector<Vector> random_initial_states(const ProtocolSpec& spec,
                                          int agent_count, UniformRng& rng) {
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(agent_count));
  for (int i = 0; i < agent_count; ++i) {
    const int dim = (spec.kind == ProtocolKind::kOutputSync ||
                     spec.kind == ProtocolKind::kRegulatedSync)
                        ? spec.agents[static_cast<std::size_t>(i)].n()
                        : spec.model_dim();
    Vector v(dim);
    for (int j = 0; j < dim; ++j) {
      v(j) = rng.symmetric();
    }
    states.push_back(std::move(v));
  }
  return states;
}

namespace {

double max_pairwise_gap(const std::vector<Vector>& values) {
  double gap = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      gap = std::max(gap, (values[i] - values[j]).cwiseAbs().maxCoeff());
    }
  }
  return gap;
}

double magnitude(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

Trace run(const SimConfig& cfg) {
  const ProtocolSpec& spec = cfg.protocol;
  const int n_nodes = cfg.graph.size();
  const bool heterogeneous = spec.kind == ProtocolKind::kOutputSync ||
                             spec.kind == ProtocolKind::kRegulatedSync;
  const bool regulated = spec.kind == ProtocolKind::kRegulatedSync;
  if (cfg.horizon < 0) {
    throw ConfigError("run: horizon must be nonnegative");
  }
  if (heterogeneous && static_cast<int>(spec.agents.size()) != n_nodes) {
    throw ConfigError("run: graph has " + std::to_string(n_nodes) +
                      " nodes but the spec carries " +
                      std::to_string(spec.agents.size()) + " agents");
  }

  Matrix d;
  RootedNetworkMatrices nets;
  if (regulated) {
    nets = rooted_networks(cfg.graph, cfg.rootset);
    if (!cfg.allow_unverified && !nets.rooted) {
      throw StructuralError("run: graph admission failed, some node is "
                            "unreachable from the root set");
    }
  } else {
    if (!cfg.allow_unverified && !has_spanning_tree(cfg.graph)) {
      throw StructuralError("run: graph admission failed, no directed "
                            "spanning tree");
    }
    d = row_stochastic(cfg.graph).D;
  }

  UniformRng rng(cfg.seed);
  std::vector<Vector> x;
  if (cfg.initial_states) {
    x = *cfg.initial_states;
    if (static_cast<int>(x.size()) != n_nodes) {
      throw ConfigError("run: need one initial state per node");
    }
    for (int i = 0; i < n_nodes; ++i) {
      const int want = heterogeneous ? spec.agents[static_cast<std::size_t>(i)].n()
                                     : spec.model_dim();
      if (x[static_cast<std::size_t>(i)].size() != want) {
        throw ConfigError("run: initial state for agent " + std::to_string(i + 1) +
                          " has dimension " +
                          std::to_string(x[static_cast<std::size_t>(i)].size()) +
                          ", expected " + std::to_string(want));
      }
    }
  } else {
    x = random_initial_states(spec, n_nodes, rng);
  }
  Vector xr;
  if (regulated) {
    const Matrix& ar = spec.exosystem->Ar;
    if (cfg.exo_initial) {
      if (cfg.exo_initial->size() != ar.rows()) {
        throw ConfigError("run: exosystem initial state has dimension " +
                          std::to_string(cfg.exo_initial->size()) + ", expected " +
                          std::to_string(ar.rows()));
      }
      xr = *cfg.exo_initial;
    } else {
      xr = Vector(ar.rows());
      for (Eigen::Index j = 0; j < xr.size(); ++j) {
        xr(j) = rng.symmetric();
      }
    }
  }

  std::vector<ControllerState> ctrl;
  ctrl.reserve(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    ctrl.push_back(spec.initial_state(i));
  }

  Trace tr;
  tr.kind = spec.kind;
  tr.horizon = cfg.horizon;

  for (int k = 0; k <= cfg.horizon; ++k) {
    std::vector<Vector> ys(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
      const Matrix& ci = heterogeneous
                             ? spec.agents[static_cast<std::size_t>(i)].C()
                             : spec.C;
      ys[static_cast<std::size_t>(i)] = ci * x[static_cast<std::size_t>(i)];
    }
    double yr = 0.0;
    if (regulated) {
      yr = (spec.exosystem->Cr * xr)(0);
    }

    std::vector<Vector> rho(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
      rho[static_cast<std::size_t>(i)] = ctrl[static_cast<std::size_t>(i)].eta;
    }

    std::vector<Vector> zeta;
    std::vector<Vector> zetahat;
    if (regulated) {
      RegulatedSignals rs = regulated_signals(ys, yr, rho, nets);
      zeta = std::move(rs.zetabar);
      zetahat = std::move(rs.zetacheck);
    } else {
      zeta = network_signals(d, spec.kind == ProtocolKind::kFullState ? x : ys);
      zetahat = network_signals(d, rho);
    }

    std::vector<StepResult> steps(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      switch (spec.kind) {
        case ProtocolKind::kFullState:
          steps[si] = protocol1_step(ctrl[si], zeta[si], zetahat[si], spec);
          break;
        case ProtocolKind::kPartialState:
          steps[si] = protocol2_step(ctrl[si], zeta[si], zetahat[si], spec);
          break;
        case ProtocolKind::kOutputSync: {
          const Vector z = *spec.agents[si].Cm() * x[si];
          steps[si] = protocol3_step(ctrl[si], zeta[si], zetahat[si], z, spec, i);
          break;
        }
        case ProtocolKind::kRegulatedSync: {
          const Vector z = *spec.agents[si].Cm() * x[si];
          steps[si] = protocol4_step(ctrl[si], zeta[si], zetahat[si], z, spec, i);
          break;
        }
      }
    }

    std::vector<Vector> us(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
      us[static_cast<std::size_t>(i)] = steps[static_cast<std::size_t>(i)].u;
    }

    tr.x.push_back(x);
    tr.y.push_back(ys);
    tr.u.push_back(us);
    tr.zeta.push_back(zeta);
    tr.controller.push_back(ctrl);
    if (regulated) {
      tr.exo.push_back(xr);
      tr.y_ref.push_back(yr);
    }
    if (heterogeneous) {
      tr.disagreement.push_back(max_pairwise_gap(ys));
    } else {
      tr.disagreement.push_back(max_pairwise_gap(x));
    }
    if (regulated) {
      double err = 0.0;
      for (const Vector& v : ys) {
        err = std::max(err, std::abs(v(0) - yr));
      }
      tr.regulation_error.push_back(err);
    }

    double mag = regulated ? magnitude(xr) : 0.0;
    for (int i = 0; i < n_nodes; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      mag = std::max({mag, magnitude(x[si]), magnitude(ctrl[si].eta),
                      magnitude(ctrl[si].xhat), magnitude(ctrl[si].xi)});
    }
    if (mag > kDivergenceLimit) {
      throw DivergedError("run: state magnitude " + std::to_string(mag) +
                          " exceeded the divergence guard at step " +
                          std::to_string(k));
    }

    if (k < cfg.horizon) {
      for (int i = 0; i < n_nodes; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const Matrix& ai = heterogeneous ? spec.agents[si].A() : spec.A;
        const Matrix& bi = heterogeneous ? spec.agents[si].B() : spec.B;
        x[si] = ai * x[si] + bi * steps[si].u;
        ctrl[si] = steps[si].state;
      }
      if (regulated) {
        xr = spec.exosystem->Ar * xr;
      }
    }
  }
  return tr;
}

}  // namespace scalefree
