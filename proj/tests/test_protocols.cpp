#include <doctest.h>

#include <cmath>
#include <vector>

#include "scalefree/experiment.hpp"
#include "scalefree/protocols.hpp"

using namespace scalefree;

namespace {

ProtocolSpec shipped_partial_state() {
  return ProtocolSpec::partial_state(reference_example_model(),
                                     reference_example_k(),
                                     reference_example_h());
}

}  // namespace

TEST_CASE("protocol kind indices round-trip") {
  for (int i = 1; i <= 4; ++i) {
    CHECK(protocol_index(protocol_kind_from_index(i)) == i);
  }
  CHECK_THROWS_AS(protocol_kind_from_index(0), ConfigError);
  CHECK_THROWS_AS(protocol_kind_from_index(5), ConfigError);
}

TEST_CASE("full-state factory records the closed-loop radius") {
  const LtiSystem model = reference_example_model();
  const ProtocolSpec spec =
      ProtocolSpec::full_state(model, reference_example_k());
  CHECK(spec.kind == ProtocolKind::kFullState);
  CHECK(spec.model_dim() == 3);
  CHECK(spec.H.size() == 0);
  // Recording is unconditional: this gain is not stabilizing and the spec
  // must say so rather than refuse.
  CHECK(std::abs(spec.rho_control - 1.265185136588009) <= 1e-9);

  const ControllerState s = spec.initial_state(0);
  CHECK(s.eta.size() == 3);
  CHECK(s.eta.isZero());
  CHECK(s.xhat.size() == 0);
  CHECK(s.xi.size() == 0);

  CHECK_THROWS_AS(ProtocolSpec::full_state(model, Matrix::Zero(1, 2)),
                  DimensionError);
}

TEST_CASE("partial-state factory records both radii") {
  const ProtocolSpec spec = shipped_partial_state();
  CHECK(spec.kind == ProtocolKind::kPartialState);
  CHECK(std::abs(spec.rho_control - 1.265185136588009) <= 1e-9);
  CHECK(std::abs(spec.rho_observer - 0.5903070167619651) <= 1e-9);

  const ControllerState s = spec.initial_state(2);
  CHECK(s.eta.size() == 3);
  CHECK(s.xhat.size() == 3);
  CHECK(s.xi.size() == 0);

  CHECK_THROWS_AS(ProtocolSpec::partial_state(reference_example_model(),
                                              reference_example_k(),
                                              Matrix::Zero(2, 1)),
                  DimensionError);
}

TEST_CASE("full-state step equations by hand") {
  const ProtocolSpec spec = ProtocolSpec::full_state(reference_example_model(),
                                                     reference_example_k());
  ControllerState s = spec.initial_state(0);
  s.eta(0) = 1.0;

  SUBCASE("no coupling") {
    const StepResult out =
        protocol1_step(s, Vector::Zero(3), Vector::Zero(3), spec);
    CHECK(out.u.size() == 1);
    CHECK(out.u(0) == -0.0695);
    Vector expected(3);
    expected << 0.5, 0.0, -0.0695;
    CHECK((out.state.eta - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.rho - s.eta).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("coupling enters through A") {
    Vector zeta = Vector::Zero(3);
    zeta(1) = 1.0;
    const StepResult out = protocol1_step(s, zeta, Vector::Zero(3), spec);
    Vector expected(3);
    expected << 0.5 + 1.0, 0.866, 0.5 - 0.0695;
    CHECK((out.state.eta - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("wrong spec kind is refused") {
    CHECK_THROWS_AS(
        protocol2_step(s, Vector::Zero(1), Vector::Zero(3), spec), ConfigError);
  }
  SUBCASE("wrong signal dimension is refused") {
    CHECK_THROWS_AS(protocol1_step(s, Vector::Zero(2), Vector::Zero(3), spec),
                    DimensionError);
  }
}

TEST_CASE("partial-state step equations by hand") {
  const ProtocolSpec spec = shipped_partial_state();
  ControllerState s = spec.initial_state(0);
  s.eta(0) = 1.0;

  const StepResult out =
      protocol2_step(s, Vector::Zero(1), Vector::Zero(3), spec);
  CHECK(out.u(0) == -0.0695);
  Vector expected(3);
  expected << 0.5, 0.0, -0.0695;
  CHECK((out.state.eta - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.state.xhat.isZero());

  // A nonzero output coupling drives the observer through H.
  const StepResult driven =
      protocol2_step(s, Vector::Constant(1, 2.0), Vector::Zero(3), spec);
  CHECK((driven.state.xhat - 2.0 * reference_example_h()).cwiseAbs().maxCoeff() ==
        0.0);

  CHECK_THROWS_AS(protocol1_step(s, Vector::Zero(3), Vector::Zero(3), spec),
                  ConfigError);
}

TEST_CASE("heterogeneous factories build one compensator per agent") {
  const std::vector<LtiSystem> agents = bundled_heterogeneous_agents();
  const TargetModel target = default_target(2);
  const GainSet gs = GainSet::design(target.system);

  const ProtocolSpec spec =
      ProtocolSpec::output_sync(agents, target, gs.K(), gs.H());
  CHECK(spec.kind == ProtocolKind::kOutputSync);
  CHECK(spec.agents.size() == 3);
  CHECK(spec.compensators.size() == 3);
  CHECK(spec.model_dim() == 2);
  CHECK(spec.rho_control < 1e-9);  // nilpotent target closes at radius zero
  CHECK(spec.rho_observer < 1e-9);

  for (int i = 0; i < 3; ++i) {
    const ControllerState s = spec.initial_state(i);
    CHECK(s.eta.size() == 2);
    CHECK(s.xhat.size() == 2);
    CHECK(s.xi.size() == spec.compensators[static_cast<std::size_t>(i)].xi_dim());
  }
  CHECK_THROWS_AS(spec.initial_state(3), ConfigError);
  CHECK_THROWS_AS(ProtocolSpec::output_sync({}, target, gs.K(), gs.H()),
                  ConfigError);
}

TEST_CASE("regulated factory carries the exosystem") {
  Matrix ar(2, 2);
  ar << 0, 1,
        -1, 0;
  Matrix cr(1, 2);
  cr << 1, 0;
  const ExosystemSpec exo = augment_exosystem(cr, ar, 2);
  const GainSet gs = GainSet::design(exo.augmented);
  const ProtocolSpec spec = ProtocolSpec::regulated_sync(
      bundled_heterogeneous_agents(), exo, gs.K(), gs.H());

  CHECK(spec.kind == ProtocolKind::kRegulatedSync);
  REQUIRE(spec.exosystem.has_value());
  CHECK((spec.A - exo.augmented.A()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(spec.compensators.size() == 3);

  // Step guards: the compensated kinds check the agent index.
  ControllerState s = spec.initial_state(0);
  CHECK_THROWS_AS(protocol4_step(s, Vector::Zero(1), Vector::Zero(2),
                                 Vector::Zero(1), spec, 7),
                  ConfigError);
  CHECK_THROWS_AS(protocol3_step(s, Vector::Zero(1), Vector::Zero(2),
                                 Vector::Zero(1), spec, 0),
                  ConfigError);  // kind mismatch
}
