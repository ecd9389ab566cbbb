// Acceptance suite: ten numbered criteria, one PASS/FAIL line each, exit
// code equal to the number of failed criteria.
//
// Criterion 10 (determinism) is checked by evaluating criteria 1-9 twice in
// the same process and comparing the two reports byte for byte. Every RNG
// below is locally seeded, so the reports must match exactly. Wall-clock
// budgets are enforced outside the compared text: a slow criterion is
// downgraded to FAIL after the comparison, with its own explanatory line.
//
// Tolerances are pinned here, next to the checks that use them. A FAIL line
// is a faithful measurement, not a defect in this suite: the bundled
// reference gain pair is reported exactly as the numbers come out.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "scalefree/experiment.hpp"
#include "scalefree/verify.hpp"
#include "support.hpp"

using namespace scalefree;

namespace {

// Pinned acceptance tolerances.
constexpr double kSpectralMargin = 1e-4;        // criterion 1
constexpr double kAgentEigLow = 0.9999;         // criterion 1
constexpr double kAgentEigHigh = 1.0001;        // criterion 1
constexpr double kContractionRatio = 1e-4;      // criteria 2-3
constexpr int kContractionSteps = 5000;         // criteria 2-3, 8-9
constexpr double kEigMultisetTol = 1e-8;        // criterion 4
constexpr double kRowStochasticIdentityTol = 1e-12;  // criterion 4
constexpr double kStabilityMargin = 1e-9;       // criterion 5 radius cutoff
constexpr double kTriangularResidualTol = 1e-10;     // criterion 6
constexpr double kBlockRecomputeTol = 1e-12;    // criterion 6
constexpr double kErrorAutonomyTol = 1e-9;      // criterion 6
constexpr double kOracleTol = 1e-9;             // criterion 6
constexpr double kSlopeSlack = 0.05;            // criterion 7
constexpr double kDecayFloor = 1e-14;           // criterion 7 sample cutoff
constexpr double kShrinkFactor = 1e3;           // criteria 8-9
constexpr double kExoOutputTol = 1e-10;         // criterion 9

// Wall-clock budgets in seconds; 0 means no budget stated.
constexpr double kBudgets[9] = {1.0, 10.0, 10.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

struct Criterion {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- criterion 1

Criterion criterion1_gain_certification() {
  const LtiSystem model = reference_example_model();
  const Matrix k = reference_example_k();
  const Matrix h = reference_example_h();
  const double rho_bk = spectral_radius(model.A() - model.B() * k);
  const double rho_hc = spectral_radius(model.A() - h * model.C());
  const double eig_a = eigenvalues(model.A()).cwiseAbs().maxCoeff();
  const double margin_bk = 1.0 - rho_bk;
  const double margin_hc = 1.0 - rho_hc;

  Criterion c;
  const bool agent_ok = eig_a >= kAgentEigLow && eig_a <= kAgentEigHigh;
  const bool control_ok = rho_bk < 1.0 && margin_bk > kSpectralMargin;
  const bool observer_ok = rho_hc < 1.0 && margin_hc > kSpectralMargin;
  c.pass = agent_ok && control_ok && observer_ok;
  c.detail = "bundled gain pair on the bundled agent: rho(A - BK) = " +
             fmt17(rho_bk) + " (margin " + fmt17(margin_bk) +
             "), rho(A - HC) = " + fmt17(rho_hc) + " (margin " +
             fmt17(margin_hc) + "), max |eig(A)| = " + fmt17(eig_a);
  return c;
}

// ------------------------------------------------------------- criteria 2, 3

Criterion contraction_with_bundled_gains(ProtocolKind kind) {
  const LtiSystem model = reference_example_model();
  const Matrix k_ref = reference_example_k();
  const Matrix h_ref = reference_example_h();
  const ProtocolSpec spec =
      kind == ProtocolKind::kFullState
          ? ProtocolSpec::full_state(model, k_ref)
          : ProtocolSpec::partial_state(model, k_ref, h_ref);

  const int graph_order[3] = {3, 1, 2};  // N = 3, 4, 6
  int total = 0;
  int contracted = 0;
  int diverged = 0;
  std::string first_failure;
  for (int gi : graph_order) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ++total;
      SimConfig cfg;
      cfg.protocol = spec;
      cfg.graph = bundled_graph(gi);
      cfg.horizon = kContractionSteps;
      cfg.seed = seed;
      try {
        const Trace tr = run(cfg);
        const double d0 = tr.disagreement.front();
        double best = d0;
        bool ok = d0 == 0.0;
        for (double d : tr.disagreement) {
          best = std::min(best, d);
          if (d < d0 * kContractionRatio) {
            ok = true;
            break;
          }
        }
        if (ok) {
          ++contracted;
        } else if (first_failure.empty()) {
          first_failure = "graph " + std::to_string(gi) + " seed " +
                          std::to_string(seed) + " best ratio " +
                          fmt17(best / d0);
        }
      } catch (const DivergedError& e) {
        ++diverged;
        if (first_failure.empty()) {
          first_failure = "graph " + std::to_string(gi) + " seed " +
                          std::to_string(seed) + ": " + e.what();
        }
      }
    }
  }

  Criterion c;
  c.pass = contracted == total;
  c.detail = std::to_string(contracted) + "/" + std::to_string(total) +
             " runs contracted below " + fmt17(kContractionRatio) + " within " +
             std::to_string(kContractionSteps) + " steps; " +
             std::to_string(diverged) + " diverged";
  if (!first_failure.empty()) {
    c.detail += " (first failure: " + first_failure + ")";
  }
  return c;
}

Criterion criterion2_observer_protocol_contraction() {
  return contraction_with_bundled_gains(ProtocolKind::kPartialState);
}

Criterion criterion3_state_protocol_contraction() {
  return contraction_with_bundled_gains(ProtocolKind::kFullState);
}

// ---------------------------------------------------------------- criterion 4

Criterion criterion4_network_reduction() {
  UniformRng rng(401);
  int ok = 0;
  double worst_eig = 0.0;
  double worst_identity = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + rng.below(7);  // 2..8
    const WeightedDigraph g =
        testsupport::random_tree_digraph(rng, n, rng.below(2 * n));
    const NetworkMatrices nets = row_stochastic(g);

    const Matrix identity_gap =
        (Matrix::Identity(n, n) + nets.Din).inverse() * nets.L -
        (Matrix::Identity(n, n) - nets.D);
    const double id_dev = identity_gap.cwiseAbs().maxCoeff();

    const ComplexVector ev_full = eigenvalues(nets.D);
    Eigen::Index at_one = 0;
    for (Eigen::Index i = 1; i < ev_full.size(); ++i) {
      if (std::abs(ev_full(i) - 1.0) < std::abs(ev_full(at_one) - 1.0)) {
        at_one = i;
      }
    }
    ComplexVector rest(n - 1);
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < ev_full.size(); ++i) {
      if (i != at_one) {
        rest(w++) = ev_full(i);
      }
    }
    const double eig_dev =
        std::max(std::abs(ev_full(at_one) - 1.0),
                 multiset_match_distance(rest, eigenvalues(nets.Dtilde)));

    worst_eig = std::max(worst_eig, eig_dev);
    worst_identity = std::max(worst_identity, id_dev);
    if (eig_dev <= kEigMultisetTol && id_dev <= kRowStochasticIdentityTol) {
      ++ok;
    }
  }

  Criterion c;
  c.pass = ok == 100;
  c.detail = std::to_string(ok) +
             "/100 spanning-tree digraphs: worst reduced-spectrum deviation " +
             fmt17(worst_eig) + " (tol " + fmt17(kEigMultisetTol) +
             "), worst row-stochastic identity deviation " +
             fmt17(worst_identity) + " (tol " +
             fmt17(kRowStochasticIdentityTol) + ")";
  return c;
}

// ---------------------------------------------------------------- criterion 5

bool all_reachable(const Matrix& w, const std::vector<int>& roots) {
  const int n = static_cast<int>(w.rows());
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  for (int r : roots) {
    if (!seen[static_cast<std::size_t>(r)]) {
      seen[static_cast<std::size_t>(r)] = 1;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u = 0; u < n; ++u) {
      // w(u, v) is the weight of the edge v -> u
      if (w(u, v) != 0.0 && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  for (char s : seen) {
    if (!s) {
      return false;
    }
  }
  return true;
}

Criterion criterion5_rooted_equivalence() {
  UniformRng rng(501);
  int agree = 0;
  int rooted_count = 0;
  std::string first_disagreement;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + rng.below(6);  // 1..6
    const auto [g, roots] = testsupport::random_rooted_pair(rng, n);
    const RootedNetworkMatrices nets = rooted_networks(g, roots);
    const double rho = spectral_radius(nets.Dbar);
    const bool stable = rho < 1.0 - kStabilityMargin;
    const bool reach = all_reachable(g.weights(), roots);
    if (reach) {
      ++rooted_count;
    }
    if (stable == reach && nets.rooted == reach) {
      ++agree;
    } else if (first_disagreement.empty()) {
      first_disagreement = "pair " + std::to_string(t) + ": rho(Dbar) = " +
                           fmt17(rho) + ", reachable = " +
                           (reach ? "yes" : "no");
    }
  }

  Criterion c;
  c.pass = agree == 100;
  c.detail = std::to_string(agree) +
             "/100 (graph, rootset) pairs: rho(Dbar) < 1 iff every node is "
             "reachable (" +
             std::to_string(rooted_count) + " rooted, " +
             std::to_string(100 - rooted_count) + " not)";
  if (!first_disagreement.empty()) {
    c.detail += " (first disagreement: " + first_disagreement + ")";
  }
  return c;
}

// ---------------------------------------------------------------- criterion 6

Vector stack_homogeneous(const Trace& tr, int k) {
  const std::size_t sk = static_cast<std::size_t>(k);
  std::vector<Vector> parts;
  for (const Vector& v : tr.x[sk]) parts.push_back(v);
  for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.eta);
  if (tr.kind == ProtocolKind::kPartialState) {
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.xhat);
  }
  Eigen::Index total = 0;
  for (const Vector& p : parts) total += p.size();
  Vector s(total);
  Eigen::Index off = 0;
  for (const Vector& p : parts) {
    s.segment(off, p.size()) = p;
    off += p.size();
  }
  return s;
}

Criterion criterion6_closed_loop_models() {
  UniformRng rng(601);
  int ok = 0;
  double worst_residual = 0.0;
  double worst_block = 0.0;
  double worst_autonomy = 0.0;
  double worst_oracle = 0.0;
  int uncertified = 0;

  for (int t = 0; t < 20; ++t) {
    const ProtocolKind kind =
        t % 2 == 0 ? ProtocolKind::kFullState : ProtocolKind::kPartialState;

    // Draw agents until the gain design succeeds; the RNG stream keeps the
    // sequence deterministic across runs.
    ProtocolSpec spec;
    bool designed = false;
    for (int attempt = 0; attempt < 100 && !designed; ++attempt) {
      const int n = 2 + rng.below(2);  // 2..3
      Matrix a(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          a(i, j) = rng.symmetric();
        }
      }
      const double rho_a = spectral_radius(a);
      if (rho_a > 0.98) {
        a *= 0.9 / rho_a;
      }
      Matrix b(n, 1);
      Matrix c(1, n);
      for (int i = 0; i < n; ++i) {
        b(i, 0) = rng.symmetric();
        c(0, i) = rng.symmetric();
      }
      try {
        const LtiSystem model(a, b, c);
        if (kind == ProtocolKind::kFullState) {
          spec = ProtocolSpec::full_state(model,
                                          design_state_gain(a, model.B()));
        } else {
          const GainSet gs = GainSet::design(model);
          spec = ProtocolSpec::partial_state(model, gs.K(), gs.H());
        }
        designed = true;
      } catch (const Error&) {
        // unstabilizable or undetectable draw, take the next one
      }
    }

    const int nn = 2 + rng.below(4);  // 2..5
    const WeightedDigraph g =
        testsupport::random_tree_digraph(rng, nn, rng.below(nn));
    SimConfig cfg;
    cfg.protocol = spec;
    cfg.graph = g;
    cfg.seed = 6000 + static_cast<std::uint64_t>(t);

    if (!designed || !certify_synchronization(cfg).certified) {
      ++uncertified;
      continue;
    }

    const ClosedLoopModel model = assemble(cfg);
    const int n = spec.model_dim();
    const int nm1 = nn - 1;
    bool good = true;

    worst_residual = std::max(worst_residual, model.triangularization_residual);
    good = good && model.triangularization_residual <= kTriangularResidualTol;

    // Diagonal blocks against independently assembled Kronecker products.
    const Matrix dt = reduced_matrix(row_stochastic(g).D);
    const Matrix eye = Matrix::Identity(nm1, nm1);
    std::vector<Matrix> expected;
    expected.push_back(testsupport::kron(eye, Matrix(spec.A - spec.B * spec.K)));
    expected.push_back(testsupport::kron(dt, spec.A));
    if (kind == ProtocolKind::kPartialState) {
      expected.push_back(testsupport::kron(eye, Matrix(spec.A - spec.H * spec.C)));
    }
    if (model.diagonal_blocks.size() != expected.size()) {
      good = false;
    } else {
      for (std::size_t bi = 0; bi < expected.size(); ++bi) {
        const double dev = (model.diagonal_blocks[bi].second - expected[bi])
                               .cwiseAbs()
                               .maxCoeff();
        worst_block = std::max(worst_block, dev);
        good = good && dev <= kBlockRecomputeTol;
      }
    }

    // Observer errors must run open loop: etilde(k) = (I (x) (A-HC))^k etilde(0).
    if (kind == ProtocolKind::kPartialState) {
      SimConfig short_cfg = cfg;
      short_cfg.horizon = 50;
      const Trace tr = run(short_cfg);
      const Matrix obs = model.diagonal_blocks.back().second;
      const Vector e0 = (model.T * stack_homogeneous(tr, 0)).tail(nm1 * n);
      Matrix power = Matrix::Identity(nm1 * n, nm1 * n);
      for (int k = 0; k <= 50; ++k) {
        const Vector ek =
            (model.T * stack_homogeneous(tr, k)).tail(nm1 * n);
        const double dev = (ek - power * e0).cwiseAbs().maxCoeff();
        worst_autonomy = std::max(worst_autonomy, dev);
        good = good && dev <= kErrorAutonomyTol;
        power = obs * power;
      }
    }

    const double deviation = oracle_compare(cfg, 200);
    worst_oracle = std::max(worst_oracle, deviation);
    good = good && deviation < kOracleTol;

    if (good) {
      ++ok;
    }
  }

  Criterion c;
  c.pass = ok == 20 && uncertified == 0;
  c.detail = std::to_string(ok) +
             "/20 certified closed loops: worst triangularization residual " +
             fmt17(worst_residual) + ", worst block deviation " +
             fmt17(worst_block) + ", worst observer-error autonomy deviation " +
             fmt17(worst_autonomy) + ", worst 200-step replay deviation " +
             fmt17(worst_oracle);
  if (uncertified > 0) {
    c.detail += ", " + std::to_string(uncertified) + " draws failed to certify";
  }
  return c;
}

// ---------------------------------------------------------------- criterion 7

// Monic polynomial coefficients (c_0..c_{n-1}, leading 1 implicit) from roots.
std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};  // constant polynomial 1
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];      // z * c
      next[i] -= r * c[i];      // -r * c
    }
    c = std::move(next);
  }
  c.pop_back();  // drop the implicit leading 1
  return c;
}

Criterion criterion7_cascade_decay() {
  UniformRng rng(701);
  const TargetModel target = default_target(4);
  int ok = 0;
  int trivial = 0;
  double worst_excess = -1e300;

  for (int t = 0; t < 10; ++t) {
    Compensator comp;
    LtiSystem agent = reference_example_model();  // replaced by the draw below
    bool built = false;
    for (int attempt = 0; attempt < 100 && !built; ++attempt) {
      const int n = 1 + rng.below(4);  // 1..4
      const int r = 1 + rng.below(n);  // 1..n <= nq = 4
      std::vector<double> poles;
      std::vector<double> zeros;
      for (int i = 0; i < n; ++i) {
        poles.push_back(rng.range(-0.9, 0.9));
      }
      for (int i = 0; i < n - r; ++i) {
        zeros.push_back(rng.range(-0.85, 0.85));
      }
      const std::vector<double> den = poly_from_roots(poles);
      const std::vector<double> num = poly_from_roots(zeros);

      // Controllable canonical realization: unit leading Markov parameter,
      // relative degree r by construction.
      Matrix a = Matrix::Zero(n, n);
      for (int i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = 1.0;
      }
      for (int j = 0; j < n; ++j) {
        a(n - 1, j) = -den[static_cast<std::size_t>(j)];
      }
      Matrix b = Matrix::Zero(n, 1);
      b(n - 1, 0) = 1.0;
      Matrix c = Matrix::Zero(1, n);
      for (std::size_t i = 0; i < num.size(); ++i) {
        c(0, static_cast<Eigen::Index>(i)) = num[i];
      }
      c(0, static_cast<Eigen::Index>(num.size())) = 1.0;  // monic numerator

      try {
        agent = LtiSystem(a, b, c, c);
        comp = design_precompensator(agent, target);
        built = true;
      } catch (const Error&) {
        // a pole-zero coincidence or similar degeneracy, take the next draw
      }
    }
    if (!built) {
      continue;
    }

    // Cold-start cascade against the undisturbed target from the matched
    // initial condition; the output gap is the homogenization residual.
    const int n = agent.n();
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x(i) = rng.symmetric();
    }
    Vector xi = Vector::Zero(comp.xi_dim());
    Vector q = comp.target_from_plant * x;  // xi(0) = 0 contributes nothing
    Vector p = q;

    std::vector<double> gap(201);
    for (int k = 0; k <= 200; ++k) {
      gap[static_cast<std::size_t>(k)] =
          std::abs((agent.C() * x)(0) - (target.system.C() * p)(0));
      const Vector v = Vector::Constant(1, rng.symmetric());
      const Vector u = comp.Ch * xi + comp.Dh * v;
      const Vector z = agent.Cm().value() * x;
      xi = comp.Ah * xi + comp.Bh * z + comp.Eh * v;
      x = agent.A() * x + agent.B() * u;
      p = target.system.A() * p + target.system.B() * v;
    }

    std::vector<std::pair<double, double>> samples;  // (k, log gap)
    for (int k = 20; k <= 200; ++k) {
      const double gk = gap[static_cast<std::size_t>(k)];
      if (gk >= kDecayFloor) {
        samples.emplace_back(static_cast<double>(k), std::log(gk));
      }
    }
    if (samples.size() < 2) {
      // Decayed below the measurement floor across the whole window.
      ++trivial;
      ++ok;
      continue;
    }

    double mx = 0.0;
    double my = 0.0;
    for (const auto& [sx, sy] : samples) {
      mx += sx;
      my += sy;
    }
    mx /= static_cast<double>(samples.size());
    my /= static_cast<double>(samples.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [sx, sy] : samples) {
      sxy += (sx - mx) * (sy - my);
      sxx += (sx - mx) * (sx - mx);
    }
    const double slope = sxy / sxx;
    const double excess = slope - std::log(comp.rho_As);
    worst_excess = std::max(worst_excess, excess);
    if (excess <= kSlopeSlack) {
      ++ok;
    }
  }

  Criterion c;
  c.pass = ok == 10;
  c.detail = std::to_string(ok) + "/10 cascades decay at the residual rate (" +
             std::to_string(trivial) + " below the measurement floor";
  if (worst_excess > -1e300) {
    c.detail += ", worst slope excess " + fmt17(worst_excess) + " vs slack " +
                fmt17(kSlopeSlack);
  }
  c.detail += ")";
  return c;
}

// ---------------------------------------------------------------- criterion 8

Criterion criterion8_output_synchronization() {
  const TargetModel target = default_target(2);
  const GainSet gs = GainSet::design(target.system);
  SimConfig cfg;
  cfg.protocol = ProtocolSpec::output_sync(bundled_heterogeneous_agents(),
                                           target, gs.K(), gs.H());
  cfg.graph = bundled_graph(3);
  cfg.horizon = kContractionSteps;
  cfg.seed = 8;
  const Trace tr = run(cfg);

  const double d0 = tr.disagreement.front();
  double best = d0;
  int shrink_step = -1;
  for (std::size_t k = 0; k < tr.disagreement.size(); ++k) {
    best = std::min(best, tr.disagreement[k]);
    if (shrink_step < 0 && tr.disagreement[k] * kShrinkFactor <= d0) {
      shrink_step = static_cast<int>(k);
    }
  }

  Criterion c;
  c.pass = d0 > 0.0 && shrink_step >= 0;
  c.detail = "three heterogeneous agents on the bundled cycle: output "
             "disagreement " +
             fmt17(d0) + " -> " + fmt17(best) + ", shrank 1000-fold at step " +
             std::to_string(shrink_step);
  return c;
}

// ---------------------------------------------------------------- criterion 9

Criterion criterion9_regulated_synchronization() {
  Matrix ar(2, 2);
  ar << 0, 1,
        -1, 0;
  Matrix cr(1, 2);
  cr << 1, 0;
  const ExosystemSpec exo = augment_exosystem(cr, ar, 2);
  const GainSet gs = GainSet::design(exo.augmented);
  SimConfig cfg;
  cfg.protocol = ProtocolSpec::regulated_sync(bundled_heterogeneous_agents(),
                                              exo, gs.K(), gs.H());
  cfg.graph = bundled_graph(3);
  cfg.rootset = {0};
  cfg.horizon = kContractionSteps;
  cfg.seed = 9;
  const Trace tr = run(cfg);

  const double r0 = tr.regulation_error.front();
  double best = r0;
  int shrink_step = -1;
  for (std::size_t k = 0; k < tr.regulation_error.size(); ++k) {
    best = std::min(best, tr.regulation_error[k]);
    if (shrink_step < 0 && tr.regulation_error[k] * kShrinkFactor <= r0) {
      shrink_step = static_cast<int>(k);
    }
  }

  // The augmented exosystem must reproduce the original reference output
  // from the lifted initial condition.
  UniformRng rng(901);
  double worst_output = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    Vector xr(2);
    xr << rng.symmetric(), rng.symmetric();
    Vector xc = exo.lift * xr;
    for (int k = 0; k <= 50; ++k) {
      const double dev = std::abs((cr * xr)(0) - (exo.augmented.C() * xc)(0));
      worst_output = std::max(worst_output, dev);
      xr = ar * xr;
      xc = exo.augmented.A() * xc;
    }
  }

  Criterion c;
  c.pass = r0 > 0.0 && shrink_step >= 0 && worst_output <= kExoOutputTol;
  c.detail = "regulation error " + fmt17(r0) + " -> " + fmt17(best) +
             ", shrank 1000-fold at step " + std::to_string(shrink_step) +
             "; augmented exosystem output deviation " + fmt17(worst_output) +
             " over 20 draws x 50 steps (tol " + fmt17(kExoOutputTol) + ")";
  return c;
}

// ----------------------------------------------------------------- the suite

using CriterionFn = Criterion (*)();

Criterion guarded(CriterionFn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    Criterion c;
    c.pass = false;
    c.detail = std::string("unexpected error: ") + e.what();
    return c;
  }
}

std::array<Criterion, 9> evaluate_all(std::array<double, 9>* seconds) {
  const CriterionFn fns[9] = {
      criterion1_gain_certification,
      criterion2_observer_protocol_contraction,
      criterion3_state_protocol_contraction,
      criterion4_network_reduction,
      criterion5_rooted_equivalence,
      criterion6_closed_loop_models,
      criterion7_cascade_decay,
      criterion8_output_synchronization,
      criterion9_regulated_synchronization,
  };
  std::array<Criterion, 9> out;
  for (int i = 0; i < 9; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out[static_cast<std::size_t>(i)] = guarded(fns[i]);
    const auto t1 = std::chrono::steady_clock::now();
    if (seconds != nullptr) {
      (*seconds)[static_cast<std::size_t>(i)] =
          std::chrono::duration<double>(t1 - t0).count();
    }
  }
  return out;
}

std::string report_text(const std::array<Criterion, 9>& results) {
  std::string out;
  for (int i = 0; i < 9; ++i) {
    const Criterion& c = results[static_cast<std::size_t>(i)];
    out += (c.pass ? "PASS" : "FAIL");
    out += " criterion " + std::to_string(i + 1) + ": " + c.detail + "\n";
  }
  return out;
}

}  // namespace

int main() {
  std::array<double, 9> seconds{};
  const std::array<Criterion, 9> first = evaluate_all(&seconds);
  const std::array<Criterion, 9> second = evaluate_all(nullptr);

  const std::string report1 = report_text(first);
  const std::string report2 = report_text(second);

  int failures = 0;
  std::cout << report1;
  for (int i = 0; i < 9; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    bool pass = first[si].pass;
    if (kBudgets[si] > 0.0 && seconds[si] > kBudgets[si]) {
      pass = false;
      std::cout << "FAIL criterion " << i + 1 << ": exceeded the "
                << kBudgets[si] << "s budget (" << seconds[si]
                << "s measured; timing sits outside the reproducibility "
                   "comparison)\n";
    }
    if (!pass) {
      ++failures;
    }
  }

  const bool reproducible = report1 == report2;
  if (reproducible) {
    std::cout << "PASS criterion 10: two same-seed evaluations of criteria "
                 "1-9 produced byte-identical reports ("
              << report1.size() << " bytes)\n";
  } else {
    std::cout << "FAIL criterion 10: reports differ between two same-seed "
                 "evaluations\n";
    ++failures;
  }

  std::cout << "\n" << (10 - failures) << " of 10 criteria passed\n";
  std::cout << "timings (s):";
  for (int i = 0; i < 9; ++i) {
    std::cout << ' ' << seconds[static_cast<std::size_t>(i)];
  }
  std::cout << "\n";
  return failures;
}
