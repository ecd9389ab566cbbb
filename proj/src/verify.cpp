#include "scalefree/verify.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>

namespace scalefree {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Pi = [I, -1]: subtracts the last block from the first N-1.
Matrix difference_map(int n_agents) {
  Matrix pi = Matrix::Zero(n_agents - 1, n_agents);
  pi.leftCols(n_agents - 1) = Matrix::Identity(n_agents - 1, n_agents - 1);
  pi.col(n_agents - 1) = -Vector::Ones(n_agents - 1);
  return pi;
}

struct Layout {
  std::vector<int> x_off, x_dim;    // physical agent states
  std::vector<int> xi_off, xi_dim;  // compensator states (kinds 3-4)
  int xhat_off = 0, eta_off = 0;    // uniform blocks
  int exo_off = 0, exo_dim = 0;     // kind 4 tail
  int total = 0;
};

Layout make_layout(const ProtocolSpec& spec, int n_agents) {
  Layout lay;
  const bool het = spec.kind == ProtocolKind::kOutputSync ||
                   spec.kind == ProtocolKind::kRegulatedSync;
  const int n = spec.model_dim();
  int off = 0;
  for (int i = 0; i < n_agents; ++i) {
    const int ni = het ? spec.agents[static_cast<std::size_t>(i)].n() : n;
    lay.x_off.push_back(off);
    lay.x_dim.push_back(ni);
    off += ni;
  }
  if (het) {
    for (int i = 0; i < n_agents; ++i) {
      const int d = spec.compensators[static_cast<std::size_t>(i)].xi_dim();
      lay.xi_off.push_back(off);
      lay.xi_dim.push_back(d);
      off += d;
    }
    lay.xhat_off = off;
    off += n_agents * n;
    lay.eta_off = off;
    off += n_agents * n;
  } else {
    lay.eta_off = off;
    off += n_agents * n;
    if (spec.kind == ProtocolKind::kPartialState) {
      lay.xhat_off = off;
      off += n_agents * n;
    }
  }
  if (spec.kind == ProtocolKind::kRegulatedSync) {
    lay.exo_off = off;
    lay.exo_dim = static_cast<int>(spec.exosystem->Ar.rows());
    off += lay.exo_dim;
  }
  lay.total = off;
  return lay;
}

ClosedLoopModel assemble_homogeneous(const ProtocolSpec& spec,
                                     const WeightedDigraph& graph) {
  const int nn = graph.size();
  const int n = spec.model_dim();
  const Matrix& a = spec.A;
  const Matrix bk = spec.B * spec.K;
  const NetworkMatrices nets = row_stochastic(graph);
  const Matrix imd = Matrix::Identity(nn, nn) - nets.D;  // I - D
  const Matrix eye_n = Matrix::Identity(nn, nn);
  const int nm1 = nn - 1;
  const Matrix pi = nn > 1 ? difference_map(nn) : Matrix::Zero(0, 1);
  const Matrix& dt = nets.Dtilde;
  const Matrix imdt = Matrix::Identity(nm1, nm1) - dt;

  ClosedLoopModel model;
  model.kind = spec.kind;

  if (spec.kind == ProtocolKind::kFullState) {
    model.M = Matrix::Zero(2 * nn * n, 2 * nn * n);
    model.M.topLeftCorner(nn * n, nn * n) = kron(eye_n, a);
    model.M.topRightCorner(nn * n, nn * n) = -kron(eye_n, bk);
    model.M.bottomLeftCorner(nn * n, nn * n) = kron(imd, a);
    model.M.bottomRightCorner(nn * n, nn * n) =
        kron(eye_n, a - bk) - kron(imd, a);

    model.T = Matrix::Zero(2 * nm1 * n, 2 * nn * n);
    const Matrix p = kron(pi, Matrix::Identity(n, n));
    model.T.block(0, 0, nm1 * n, nn * n) = p;
    model.T.block(nm1 * n, 0, nm1 * n, nn * n) = p;
    model.T.block(nm1 * n, nn * n, nm1 * n, nn * n) = -p;

    model.Mt = Matrix::Zero(2 * nm1 * n, 2 * nm1 * n);
    const Matrix feedback = kron(Matrix::Identity(nm1, nm1), a - bk);
    const Matrix disagreement = kron(dt, a);
    model.Mt.topLeftCorner(nm1 * n, nm1 * n) = feedback;
    model.Mt.topRightCorner(nm1 * n, nm1 * n) =
        kron(Matrix::Identity(nm1, nm1), bk);
    model.Mt.bottomRightCorner(nm1 * n, nm1 * n) = disagreement;
    model.diagonal_blocks = {{"feedback", feedback},
                             {"disagreement", disagreement}};
  } else {
    const Matrix hc = spec.H * spec.C;
    model.M = Matrix::Zero(3 * nn * n, 3 * nn * n);
    auto blk = [&](int r, int c) {
      return model.M.block(r * nn * n, c * nn * n, nn * n, nn * n);
    };
    blk(0, 0) = kron(eye_n, a);
    blk(0, 1) = -kron(eye_n, bk);
    blk(1, 1) = kron(eye_n, a - bk) - kron(imd, a);
    blk(1, 2) = kron(eye_n, a);
    blk(2, 0) = kron(imd, hc);
    blk(2, 1) = -kron(imd, bk);
    blk(2, 2) = kron(eye_n, a - hc);

    model.T = Matrix::Zero(3 * nm1 * n, 3 * nn * n);
    const Matrix p = kron(pi, Matrix::Identity(n, n));
    model.T.block(0, 0, nm1 * n, nn * n) = p;
    model.T.block(nm1 * n, 0, nm1 * n, nn * n) = p;
    model.T.block(nm1 * n, nn * n, nm1 * n, nn * n) = -p;
    model.T.block(2 * nm1 * n, 0, nm1 * n, nn * n) =
        kron(imdt * pi, Matrix::Identity(n, n));
    model.T.block(2 * nm1 * n, 2 * nn * n, nm1 * n, nn * n) = -p;

    model.Mt = Matrix::Zero(3 * nm1 * n, 3 * nm1 * n);
    auto tblk = [&](int r, int c) {
      return model.Mt.block(r * nm1 * n, c * nm1 * n, nm1 * n, nm1 * n);
    };
    const Matrix feedback = kron(Matrix::Identity(nm1, nm1), a - bk);
    const Matrix disagreement = kron(dt, a);
    const Matrix observer = kron(Matrix::Identity(nm1, nm1), a - hc);
    tblk(0, 0) = feedback;
    tblk(0, 1) = kron(Matrix::Identity(nm1, nm1), bk);
    tblk(1, 1) = disagreement;
    tblk(1, 2) = kron(Matrix::Identity(nm1, nm1), a);
    tblk(2, 2) = observer;
    model.diagonal_blocks = {{"feedback", feedback},
                             {"disagreement", disagreement},
                             {"observer", observer}};
  }
  return model;
}

ClosedLoopModel assemble_heterogeneous(const ProtocolSpec& spec,
                                       const WeightedDigraph& graph,
                                       const std::vector<int>& rootset) {
  const int nn = graph.size();
  const int nq = spec.model_dim();
  const bool regulated = spec.kind == ProtocolKind::kRegulatedSync;
  if (static_cast<int>(spec.agents.size()) != nn) {
    throw ConfigError("assemble: graph has " + std::to_string(nn) +
                      " nodes but the spec carries " +
                      std::to_string(spec.agents.size()) + " agents");
  }
  const Layout lay = make_layout(spec, nn);

  // Coupling matrix: row-stochastic reduction for kind 3, rooted companion
  // for kind 4. "w" is the weight matrix whose (I - w) scales couplings.
  Matrix w;
  Matrix reduced;  // Dtilde (kind 3) or Dbar (kind 4)
  if (regulated) {
    const RootedNetworkMatrices nets = rooted_networks(graph, rootset);
    w = nets.Dbar;
    reduced = nets.Dbar;
  } else {
    const NetworkMatrices nets = row_stochastic(graph);
    w = nets.D;
    reduced = nets.Dtilde;
  }
  const Matrix imw = Matrix::Identity(nn, nn) - w;

  const Matrix& at = spec.A;
  const Matrix& bt = spec.B;
  const Matrix& ct = spec.C;
  const Matrix bk = bt * spec.K;
  const Matrix hc = spec.H * ct;

  ClosedLoopModel model;
  model.kind = spec.kind;
  model.M = Matrix::Zero(lay.total, lay.total);
  Matrix& m = model.M;

  for (int i = 0; i < nn; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const LtiSystem& ag = spec.agents[si];
    const Compensator& cp = spec.compensators[si];
    const int xo = lay.x_off[si];
    const int xio = lay.xi_off[si];
    const int ho = lay.xhat_off + i * nq;
    const int eo = lay.eta_off + i * nq;

    m.block(xo, xo, lay.x_dim[si], lay.x_dim[si]) = ag.A();
    m.block(xo, xio, lay.x_dim[si], lay.xi_dim[si]) = ag.B() * cp.Ch;
    m.block(xo, eo, lay.x_dim[si], nq) = -ag.B() * cp.Dh * spec.K;

    m.block(xio, xo, lay.xi_dim[si], lay.x_dim[si]) = cp.Bh * *ag.Cm();
    m.block(xio, xio, lay.xi_dim[si], lay.xi_dim[si]) = cp.Ah;
    m.block(xio, eo, lay.xi_dim[si], nq) = -cp.Eh * spec.K;

    // xhat_i+ = (A - HC) xhat_i - BK zhat_i + H * coupled-output row i
    m.block(ho, ho, nq, nq) = at - hc;
    for (int j = 0; j < nn; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      m.block(ho, lay.eta_off + j * nq, nq, nq) -= imw(i, j) * bk;
      m.block(ho, lay.x_off[sj], nq, lay.x_dim[sj]) +=
          imw(i, j) * spec.H * spec.agents[sj].C();
    }
    if (regulated) {
      m.block(ho, lay.exo_off, nq, lay.exo_dim) -=
          imw.row(i).sum() * spec.H * spec.exosystem->Cr;
    }

    // eta_i+ = (A - BK) eta_i + A xhat_i - A zhat_i
    m.block(eo, ho, nq, nq) = at;
    m.block(eo, eo, nq, nq) = at - bk;
    for (int j = 0; j < nn; ++j) {
      m.block(eo, lay.eta_off + j * nq, nq, nq) -= imw(i, j) * at;
    }
  }
  if (regulated) {
    m.block(lay.exo_off, lay.exo_off, lay.exo_dim, lay.exo_dim) =
        spec.exosystem->Ar;
  }

  // Proof coordinates. Kind 3 differences against the last agent (N-1
  // blocks); kind 4 subtracts the lifted reference (N blocks).
  const int nblk = regulated ? nn : nn - 1;
  std::vector<int> resid_off(static_cast<std::size_t>(nn));
  int resid_total = 0;
  for (int i = 0; i < nn; ++i) {
    resid_off[static_cast<std::size_t>(i)] = resid_total;
    resid_total += spec.compensators[static_cast<std::size_t>(i)].resid_dim();
  }
  const int rows = 3 * nblk * nq + resid_total;

  Matrix homog = Matrix::Zero(nn * nq, lay.total);  // stacked homogenized state
  for (int i = 0; i < nn; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const Compensator& cp = spec.compensators[si];
    homog.block(i * nq, lay.x_off[si], nq, lay.x_dim[si]) = cp.target_from_plant;
    homog.block(i * nq, lay.xi_off[si], nq, lay.xi_dim[si]) = cp.target_from_comp;
  }

  Matrix base = Matrix::Zero(nblk * nq, lay.total);  // xbar or xtilde rows
  if (regulated) {
    base = homog;
    for (int i = 0; i < nn; ++i) {
      base.block(i * nq, lay.exo_off, nq, lay.exo_dim) = -spec.exosystem->lift;
    }
  } else {
    const Matrix p = kron(difference_map(nn), Matrix::Identity(nq, nq));
    base = p * homog;
  }

  model.T = Matrix::Zero(rows, lay.total);
  model.T.topRows(nblk * nq) = base;
  // e rows: base minus (differenced) eta.
  model.T.block(nblk * nq, 0, nblk * nq, lay.total) = base;
  if (regulated) {
    for (int i = 0; i < nn; ++i) {
      model.T.block(nblk * nq + i * nq, lay.eta_off + i * nq, nq, nq) -=
          Matrix::Identity(nq, nq);
    }
  } else {
    for (int i = 0; i < nblk; ++i) {
      model.T.block(nblk * nq + i * nq, lay.eta_off + i * nq, nq, nq) -=
          Matrix::Identity(nq, nq);
      model.T.block(nblk * nq + i * nq, lay.eta_off + (nn - 1) * nq, nq, nq) +=
          Matrix::Identity(nq, nq);
    }
  }
  // etilde rows: ((I - reduced) (x) I) base minus (differenced) xhat.
  const Matrix imr =
      Matrix::Identity(nblk, nblk) - reduced;
  model.T.block(2 * nblk * nq, 0, nblk * nq, lay.total) =
      kron(imr, Matrix::Identity(nq, nq)) * base;
  if (regulated) {
    for (int i = 0; i < nn; ++i) {
      model.T.block(2 * nblk * nq + i * nq, lay.xhat_off + i * nq, nq, nq) -=
          Matrix::Identity(nq, nq);
    }
  } else {
    for (int i = 0; i < nblk; ++i) {
      model.T.block(2 * nblk * nq + i * nq, lay.xhat_off + i * nq, nq, nq) -=
          Matrix::Identity(nq, nq);
      model.T.block(2 * nblk * nq + i * nq, lay.xhat_off + (nn - 1) * nq, nq,
                    nq) += Matrix::Identity(nq, nq);
    }
  }
  // residual rows.
  for (int i = 0; i < nn; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const Compensator& cp = spec.compensators[si];
    const int ro = 3 * nblk * nq + resid_off[si];
    model.T.block(ro, lay.x_off[si], cp.resid_dim(), lay.x_dim[si]) =
        cp.resid_from_plant;
    model.T.block(ro, lay.xi_off[si], cp.resid_dim(), lay.xi_dim[si]) =
        cp.resid_from_comp;
  }

  // Transformed dynamics.
  Matrix cs = Matrix::Zero(nn, resid_total);  // blkdiag of the Cs rows
  Matrix as = Matrix::Zero(resid_total, resid_total);
  for (int i = 0; i < nn; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const Compensator& cp = spec.compensators[si];
    cs.block(i, resid_off[si], 1, cp.resid_dim()) = cp.Cs;
    as.block(resid_off[si], resid_off[si], cp.resid_dim(), cp.resid_dim()) =
        cp.As;
  }
  const Matrix eye_blk = Matrix::Identity(nblk, nblk);
  const Matrix feedback = kron(eye_blk, at - bk);
  const Matrix disagreement = kron(reduced, at);
  const Matrix observer = kron(eye_blk, at - hc);
  const Matrix drive =
      regulated ? kron(Matrix::Identity(nn, nn), bt) * cs
                : kron(difference_map(nn), bt) * cs;

  model.Mt = Matrix::Zero(rows, rows);
  auto tb = [&](int r, int c) {
    return model.Mt.block(r * nblk * nq, c * nblk * nq, nblk * nq, nblk * nq);
  };
  tb(0, 0) = feedback;
  tb(0, 1) = kron(eye_blk, bk);
  tb(1, 1) = disagreement;
  tb(1, 2) = kron(eye_blk, at);
  tb(2, 2) = observer;
  model.Mt.block(0, 3 * nblk * nq, nblk * nq, resid_total) = drive;
  model.Mt.block(nblk * nq, 3 * nblk * nq, nblk * nq, resid_total) = drive;
  model.Mt.block(2 * nblk * nq, 3 * nblk * nq, nblk * nq, resid_total) =
      kron(imr, Matrix::Identity(nq, nq)) * drive;
  model.Mt.block(3 * nblk * nq, 3 * nblk * nq, resid_total, resid_total) = as;

  model.diagonal_blocks = {{"feedback", feedback},
                           {"disagreement", disagreement},
                           {"observer", observer},
                           {"residual", as}};
  return model;
}

}  // namespace

ClosedLoopModel assemble(const ProtocolSpec& spec, const WeightedDigraph& graph,
                         const std::vector<int>& rootset) {
  ClosedLoopModel model;
  switch (spec.kind) {
    case ProtocolKind::kFullState:
    case ProtocolKind::kPartialState:
      model = assemble_homogeneous(spec, graph);
      break;
    case ProtocolKind::kOutputSync:
    case ProtocolKind::kRegulatedSync:
      model = assemble_heterogeneous(spec, graph, rootset);
      break;
  }
  const Matrix gap = model.T * model.M - model.Mt * model.T;
  model.triangularization_residual =
      gap.size() == 0 ? 0.0 : gap.cwiseAbs().maxCoeff();
  return model;
}

namespace {

Vector stack_state(const Trace& tr, int k) {
  const std::size_t sk = static_cast<std::size_t>(k);
  const bool het = tr.kind == ProtocolKind::kOutputSync ||
                   tr.kind == ProtocolKind::kRegulatedSync;
  std::vector<const Vector*> parts;
  for (const Vector& v : tr.x[sk]) parts.push_back(&v);
  if (het) {
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(&c.xi);
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(&c.xhat);
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(&c.eta);
  } else {
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(&c.eta);
    if (tr.kind == ProtocolKind::kPartialState) {
      for (const ControllerState& c : tr.controller[sk]) parts.push_back(&c.xhat);
    }
  }
  if (tr.kind == ProtocolKind::kRegulatedSync) parts.push_back(&tr.exo[sk]);

  Eigen::Index total = 0;
  for (const Vector* p : parts) total += p->size();
  Vector s(total);
  Eigen::Index off = 0;
  for (const Vector* p : parts) {
    s.segment(off, p->size()) = *p;
    off += p->size();
  }
  return s;
}

}  // namespace

double oracle_compare(const ClosedLoopModel& model, const Trace& trace) {
  if (trace.x.empty()) {
    throw DimensionError("oracle_compare: empty trace");
  }
  double worst = 0.0;
  Vector s = stack_state(trace, 0);
  if (s.size() != model.M.rows()) {
    throw DimensionError("oracle_compare: trace state dimension " +
                         std::to_string(s.size()) + " does not match the model (" +
                         std::to_string(model.M.rows()) + ")");
  }
  for (int k = 0; k + 1 <= trace.horizon; ++k) {
    s = model.M * s;
    const Vector recorded = stack_state(trace, k + 1);
    worst = std::max(worst, (s - recorded).cwiseAbs().maxCoeff());
  }
  return worst;
}

SyncCertificate certify_synchronization(const ProtocolSpec& spec,
                                        const WeightedDigraph& graph,
                                        const std::vector<int>& rootset) {
  SyncCertificate cert;
  if (spec.kind == ProtocolKind::kRegulatedSync) {
    const RootedNetworkMatrices nets = rooted_networks(graph, rootset);
    if (!nets.rooted) {
      cert.refusal_reason = "graph admission failed: some node is unreachable "
                            "from the root set";
      return cert;
    }
  } else {
    if (!has_spanning_tree(graph)) {
      cert.refusal_reason = "graph admission failed: no directed spanning tree";
      return cert;
    }
  }
  cert.structural_ok = true;

  const ClosedLoopModel model = assemble(spec, graph, rootset);
  cert.certified = true;
  for (const auto& [name, block] : model.diagonal_blocks) {
    const double rho = spectral_radius(block);
    cert.block_radii.emplace_back(name, rho);
    cert.spectral_radius = std::max(cert.spectral_radius, rho);
    if (!spectral_radius_in_unit_disk(block)) {
      cert.certified = false;
    }
  }
  return cert;
}

ClosedLoopModel assemble(const SimConfig& cfg) {
  return assemble(cfg.protocol, cfg.graph, cfg.rootset);
}

double oracle_compare(const SimConfig& cfg, int steps) {
  SimConfig run_cfg = cfg;
  run_cfg.horizon = steps;
  const Trace trace = run(run_cfg);
  return oracle_compare(assemble(cfg), trace);
}

SyncCertificate certify_synchronization(const SimConfig& cfg) {
  return certify_synchronization(cfg.protocol, cfg.graph, cfg.rootset);
}

}  // namespace scalefree
