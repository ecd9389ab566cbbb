#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "scalefree/experiment.hpp"
#include "scalefree/verify.hpp"
#include "support.hpp"

using namespace scalefree;

namespace {

SimConfig homogeneous_config(ProtocolKind kind, const WeightedDigraph& graph,
                             std::uint64_t seed) {
  const LtiSystem model = reference_example_model();
  SimConfig cfg;
  if (kind == ProtocolKind::kFullState) {
    cfg.protocol = ProtocolSpec::full_state(model, design_state_gain(model));
  } else {
    const GainSet gs = GainSet::design(model);
    cfg.protocol = ProtocolSpec::partial_state(model, gs.K(), gs.H());
  }
  cfg.graph = graph;
  cfg.seed = seed;
  return cfg;
}

SimConfig output_sync_config(std::uint64_t seed) {
  const TargetModel target = default_target(2);
  const GainSet gs = GainSet::design(target.system);
  SimConfig cfg;
  cfg.protocol = ProtocolSpec::output_sync(bundled_heterogeneous_agents(),
                                           target, gs.K(), gs.H());
  cfg.graph = bundled_graph(3);
  cfg.seed = seed;
  return cfg;
}

SimConfig regulated_config(std::uint64_t seed) {
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
  cfg.seed = seed;
  return cfg;
}

// Stacks the recorded run state in the documented model order, kept
// independent of the library's own stacker.
Vector stacked(const Trace& tr, int k) {
  const std::size_t sk = static_cast<std::size_t>(k);
  std::vector<Vector> parts;
  for (const Vector& v : tr.x[sk]) parts.push_back(v);
  const bool het = tr.kind == ProtocolKind::kOutputSync ||
                   tr.kind == ProtocolKind::kRegulatedSync;
  if (het) {
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.xi);
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.xhat);
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.eta);
    if (tr.kind == ProtocolKind::kRegulatedSync) parts.push_back(tr.exo[sk]);
  } else {
    for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.eta);
    if (tr.kind == ProtocolKind::kPartialState) {
      for (const ControllerState& c : tr.controller[sk]) parts.push_back(c.xhat);
    }
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

}  // namespace

TEST_CASE("single-agent state-coupling model has no coupling term") {
  const LtiSystem model = reference_example_model();
  const Matrix k = design_state_gain(model);
  const ProtocolSpec spec = ProtocolSpec::full_state(model, k);
  const ClosedLoopModel cl = assemble(spec, WeightedDigraph(Matrix::Zero(1, 1)));

  REQUIRE(cl.M.rows() == 6);
  const Matrix bk = model.B() * k;
  CHECK((cl.M.topLeftCorner(3, 3) - model.A()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((cl.M.topRightCorner(3, 3) + bk).cwiseAbs().maxCoeff() == 0.0);
  // One node is its own neighborhood average: the coupling row vanishes.
  CHECK(cl.M.bottomLeftCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK((cl.M.bottomRightCorner(3, 3) - (model.A() - bk)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(cl.triangularization_residual == 0.0);
}

TEST_CASE("state-coupling model triangularizes with the documented blocks") {
  const SimConfig cfg = homogeneous_config(ProtocolKind::kFullState,
                                           bundled_graph(3), 0);
  const ClosedLoopModel cl = assemble(cfg);
  CHECK(cl.triangularization_residual <= 1e-10);

  REQUIRE(cl.diagonal_blocks.size() == 2);
  CHECK(cl.diagonal_blocks[0].first == "feedback");
  CHECK(cl.diagonal_blocks[1].first == "disagreement");

  const LtiSystem model = reference_example_model();
  const Matrix k = design_state_gain(model);
  const Matrix dt = reduced_matrix(row_stochastic(bundled_graph(3)).D);
  const Matrix fb = testsupport::kron(Matrix::Identity(2, 2),
                                      Matrix(model.A() - model.B() * k));
  const Matrix dis = testsupport::kron(dt, model.A());
  CHECK((cl.diagonal_blocks[0].second - fb).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((cl.diagonal_blocks[1].second - dis).cwiseAbs().maxCoeff() <= 1e-12);

  // Kronecker spectrum check: radius of the coupling block factors.
  CHECK(std::abs(spectral_radius(dis) -
                 spectral_radius(dt) * spectral_radius(model.A())) <= 1e-9);
}

TEST_CASE("observer-coupling model adds the observer block") {
  const SimConfig cfg = homogeneous_config(ProtocolKind::kPartialState,
                                           bundled_graph(1), 0);
  const ClosedLoopModel cl = assemble(cfg);
  CHECK(cl.triangularization_residual <= 1e-10);

  REQUIRE(cl.diagonal_blocks.size() == 3);
  CHECK(cl.diagonal_blocks[0].first == "feedback");
  CHECK(cl.diagonal_blocks[1].first == "disagreement");
  CHECK(cl.diagonal_blocks[2].first == "observer");

  const LtiSystem model = reference_example_model();
  const GainSet gs = GainSet::design(model);
  const Matrix obs = testsupport::kron(
      Matrix::Identity(3, 3), Matrix(model.A() - gs.H() * model.C()));
  CHECK((cl.diagonal_blocks[2].second - obs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("heterogeneous models triangularize and name four blocks") {
  for (int kind = 3; kind <= 4; ++kind) {
    CAPTURE(kind);
    const SimConfig cfg = kind == 3 ? output_sync_config(0) : regulated_config(0);
    const ClosedLoopModel cl = assemble(cfg);
    CHECK(cl.triangularization_residual <= 1e-10);
    REQUIRE(cl.diagonal_blocks.size() == 4);
    CHECK(cl.diagonal_blocks[0].first == "feedback");
    CHECK(cl.diagonal_blocks[1].first == "disagreement");
    CHECK(cl.diagonal_blocks[2].first == "observer");
    CHECK(cl.diagonal_blocks[3].first == "residual");

    // Proof coordinates difference N-1 ways for output sync, N ways when a
    // reference is tracked.
    const int nblk = kind == 3 ? 2 : 3;
    const int nq = cfg.protocol.model_dim();
    CHECK(cl.diagonal_blocks[0].second.rows() == nblk * nq);

    const Matrix reduced =
        kind == 3 ? reduced_matrix(row_stochastic(cfg.graph).D)
                  : rooted_networks(cfg.graph, cfg.rootset).Dbar;
    const Matrix dis = testsupport::kron(reduced, cfg.protocol.A);
    CHECK((cl.diagonal_blocks[1].second - dis).cwiseAbs().maxCoeff() <= 1e-12);

    for (const auto& [name, block] : cl.diagonal_blocks) {
      CAPTURE(name);
      CHECK(spectral_radius(block) < 1.0);
    }
  }
}

TEST_CASE("disagreement coordinates evolve autonomously in the state protocol") {
  SimConfig cfg = homogeneous_config(ProtocolKind::kFullState, bundled_graph(3), 4);
  cfg.horizon = 50;
  const Trace tr = run(cfg);
  const ClosedLoopModel cl = assemble(cfg);

  const int n = cfg.protocol.model_dim();
  const int nm1 = 2;
  const Matrix dis = cl.diagonal_blocks[1].second;  // D~ (x) A

  const Vector e0 = (cl.T * stacked(tr, 0)).tail(nm1 * n);
  Matrix power = Matrix::Identity(nm1 * n, nm1 * n);
  for (int k = 0; k <= 50; ++k) {
    const Vector ek = (cl.T * stacked(tr, k)).tail(nm1 * n);
    CHECK((ek - power * e0).cwiseAbs().maxCoeff() <= 1e-9);
    power = dis * power;
  }
}

TEST_CASE("observer errors evolve autonomously in the observer protocol") {
  SimConfig cfg = homogeneous_config(ProtocolKind::kPartialState, bundled_graph(3), 4);
  cfg.horizon = 50;
  const Trace tr = run(cfg);
  const ClosedLoopModel cl = assemble(cfg);

  const int n = cfg.protocol.model_dim();
  const int nm1 = 2;
  const Matrix obs = cl.diagonal_blocks[2].second;  // I (x) (A - HC)

  const Vector et0 = (cl.T * stacked(tr, 0)).tail(nm1 * n);
  Matrix power = Matrix::Identity(nm1 * n, nm1 * n);
  for (int k = 0; k <= 50; ++k) {
    const Vector etk = (cl.T * stacked(tr, k)).tail(nm1 * n);
    CHECK((etk - power * et0).cwiseAbs().maxCoeff() <= 1e-9);
    power = obs * power;
  }
}

TEST_CASE("proof coordinates obey the triangular dynamics on a real run") {
  SimConfig cfg = output_sync_config(9);
  cfg.horizon = 60;
  const Trace tr = run(cfg);
  const ClosedLoopModel cl = assemble(cfg);
  for (int k = 0; k < 60; ++k) {
    const Vector zk = cl.T * stacked(tr, k);
    const Vector zk1 = cl.T * stacked(tr, k + 1);
    CHECK((zk1 - cl.Mt * zk).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("matrix model replays the simulator") {
  SUBCASE("state coupling") {
    CHECK(oracle_compare(homogeneous_config(ProtocolKind::kFullState,
                                            bundled_graph(3), 11),
                         200) < 1e-9);
  }
  SUBCASE("observer coupling") {
    CHECK(oracle_compare(homogeneous_config(ProtocolKind::kPartialState,
                                            bundled_graph(1), 12),
                         200) < 1e-9);
  }
  SUBCASE("output synchronization") {
    CHECK(oracle_compare(output_sync_config(13), 200) < 1e-9);
  }
  SUBCASE("regulated output synchronization") {
    CHECK(oracle_compare(regulated_config(14), 200) < 1e-9);
  }
  SUBCASE("zero initial state replays exactly") {
    SimConfig cfg = homogeneous_config(ProtocolKind::kPartialState,
                                       bundled_graph(3), 0);
    cfg.initial_states =
        std::vector<Vector>{Vector::Zero(3), Vector::Zero(3), Vector::Zero(3)};
    CHECK(oracle_compare(cfg, 50) == 0.0);
  }
}

TEST_CASE("oracle comparison validates its inputs") {
  const SimConfig small = homogeneous_config(ProtocolKind::kFullState,
                                             bundled_graph(3), 0);
  const ClosedLoopModel cl = assemble(small);
  SUBCASE("empty trace") {
    Trace tr;
    CHECK_THROWS_AS(oracle_compare(cl, tr), DimensionError);
  }
  SUBCASE("trace from a different network") {
    SimConfig other = homogeneous_config(ProtocolKind::kFullState,
                                         bundled_graph(1), 0);
    other.horizon = 5;
    const Trace tr = run(other);
    CHECK_THROWS_AS(oracle_compare(cl, tr), DimensionError);
  }
}

TEST_CASE("synchronization certificates") {
  SUBCASE("designed gains certify on every bundled graph") {
    for (int which = 1; which <= 3; ++which) {
      CAPTURE(which);
      const SyncCertificate cert = certify_synchronization(
          homogeneous_config(ProtocolKind::kPartialState, bundled_graph(which), 0));
      CHECK(cert.structural_ok);
      CHECK(cert.refusal_reason.empty());
      CHECK(cert.certified);
      CHECK(cert.spectral_radius < 1.0);
      CHECK(cert.block_radii.size() == 3);
    }
  }
  SUBCASE("unstable supplied gains are reported, not refused") {
    SimConfig cfg;
    cfg.protocol = ProtocolSpec::partial_state(
        reference_example_model(), reference_example_k(), reference_example_h());
    cfg.graph = bundled_graph(3);
    const SyncCertificate cert = certify_synchronization(cfg);
    CHECK(cert.structural_ok);
    CHECK_FALSE(cert.certified);
    // The feedback block carries the instability; its radius is pinned so
    // the report stays trustworthy.
    CHECK(std::abs(cert.spectral_radius - 1.265185136588009) <= 1e-9);
    bool found = false;
    for (const auto& [name, rho] : cert.block_radii) {
      if (name == "feedback") {
        found = true;
        CHECK(rho > 1.0);
      }
    }
    CHECK(found);
  }
  SUBCASE("structural refusal names the missing spanning tree") {
    const SyncCertificate cert = certify_synchronization(homogeneous_config(
        ProtocolKind::kFullState, WeightedDigraph(Matrix::Zero(2, 2)), 0));
    CHECK_FALSE(cert.structural_ok);
    CHECK_FALSE(cert.certified);
    CHECK(cert.refusal_reason.find("spanning tree") != std::string::npos);
    CHECK(cert.block_radii.empty());
  }
  SUBCASE("structural refusal names the unreachable root") {
    SimConfig cfg = regulated_config(0);
    Matrix w = Matrix::Zero(3, 3);
    w(1, 0) = 1.0;
    cfg.graph = WeightedDigraph(w);
    const SyncCertificate cert = certify_synchronization(cfg);
    CHECK_FALSE(cert.structural_ok);
    CHECK(cert.refusal_reason.find("unreachable") != std::string::npos);
  }
  SUBCASE("regulated design certifies") {
    const SyncCertificate cert = certify_synchronization(regulated_config(0));
    CHECK(cert.structural_ok);
    CHECK(cert.certified);
    CHECK(cert.block_radii.size() == 4);
  }
}

TEST_CASE("convenience overloads match the explicit calls") {
  const SimConfig cfg = homogeneous_config(ProtocolKind::kPartialState,
                                           bundled_graph(3), 0);
  const ClosedLoopModel a = assemble(cfg);
  const ClosedLoopModel b = assemble(cfg.protocol, cfg.graph, cfg.rootset);
  CHECK((a.M - b.M).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.Mt - b.Mt).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.T - b.T).cwiseAbs().maxCoeff() == 0.0);
}
