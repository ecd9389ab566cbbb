#include "scalefree/protocols.hpp"

#include <string>
#include <utility>

namespace scalefree {

namespace {

void check_size(const Vector& v, Eigen::Index want, const char* name) {
  if (v.size() != want) {
    throw DimensionError(std::string(name) + " has size " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(want));
  }
}

void check_gain_dims(const Matrix& a, const Matrix& b, const Matrix& c,
                     const Matrix& k, const Matrix* h) {
  if (k.rows() != b.cols() || k.cols() != a.rows()) {
    throw DimensionError("ProtocolSpec: K must be m x n for the model");
  }
  if (h != nullptr && (h->rows() != a.rows() || h->cols() != c.rows())) {
    throw DimensionError("ProtocolSpec: H must be n x p for the model");
  }
}

}  // namespace

int protocol_index(ProtocolKind kind) { return static_cast<int>(kind); }

ProtocolKind protocol_kind_from_index(int index) {
  if (index < 1 || index > 4) {
    throw ConfigError("protocol index must be 1, 2, 3, or 4 (got " +
                      std::to_string(index) + ")");
  }
  return static_cast<ProtocolKind>(index);
}

ControllerState ProtocolSpec::initial_state(int agent_index) const {
  const int n = model_dim();
  ControllerState s;
  s.eta = Vector::Zero(n);
  switch (kind) {
    case ProtocolKind::kFullState:
      s.xhat = Vector::Zero(0);
      s.xi = Vector::Zero(0);
      break;
    case ProtocolKind::kPartialState:
      s.xhat = Vector::Zero(n);
      s.xi = Vector::Zero(0);
      break;
    case ProtocolKind::kOutputSync:
    case ProtocolKind::kRegulatedSync:
      if (agent_index < 0 ||
          agent_index >= static_cast<int>(compensators.size())) {
        throw ConfigError("initial_state: agent index " +
                          std::to_string(agent_index) + " out of range");
      }
      s.xhat = Vector::Zero(n);
      s.xi = Vector::Zero(compensators[static_cast<std::size_t>(agent_index)].xi_dim());
      break;
  }
  return s;
}

ProtocolSpec ProtocolSpec::full_state(const LtiSystem& model, const Matrix& k) {
  check_gain_dims(model.A(), model.B(), model.C(), k, nullptr);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kFullState;
  spec.A = model.A();
  spec.B = model.B();
  spec.C = model.C();
  spec.K = k;
  spec.H = Matrix::Zero(0, 0);
  spec.rho_control = spectral_radius(spec.A - spec.B * k);
  spec.rho_observer = 0.0;
  return spec;
}

ProtocolSpec ProtocolSpec::partial_state(const LtiSystem& model, const Matrix& k,
                                         const Matrix& h) {
  check_gain_dims(model.A(), model.B(), model.C(), k, &h);
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kPartialState;
  spec.A = model.A();
  spec.B = model.B();
  spec.C = model.C();
  spec.K = k;
  spec.H = h;
  spec.rho_control = spectral_radius(spec.A - spec.B * k);
  spec.rho_observer = spectral_radius(spec.A - h * spec.C);
  return spec;
}

namespace {

ProtocolSpec heterogeneous_spec(ProtocolKind kind, std::vector<LtiSystem> agents,
                                const TargetModel& target, const Matrix& k,
                                const Matrix& h) {
  if (agents.empty()) {
    throw ConfigError("ProtocolSpec: at least one agent is required");
  }
  const LtiSystem& t = target.system;
  check_gain_dims(t.A(), t.B(), t.C(), k, &h);
  ProtocolSpec spec;
  spec.kind = kind;
  spec.A = t.A();
  spec.B = t.B();
  spec.C = t.C();
  spec.K = k;
  spec.H = h;
  spec.rho_control = spectral_radius(spec.A - spec.B * k);
  spec.rho_observer = spectral_radius(spec.A - h * spec.C);
  spec.compensators.reserve(agents.size());
  for (const LtiSystem& agent : agents) {
    spec.compensators.push_back(design_precompensator(agent, target));
  }
  spec.agents = std::move(agents);
  return spec;
}

}  // namespace

ProtocolSpec ProtocolSpec::output_sync(std::vector<LtiSystem> agents,
                                       const TargetModel& target, const Matrix& k,
                                       const Matrix& h) {
  return heterogeneous_spec(ProtocolKind::kOutputSync, std::move(agents), target,
                            k, h);
}

ProtocolSpec ProtocolSpec::regulated_sync(std::vector<LtiSystem> agents,
                                          const ExosystemSpec& exo, const Matrix& k,
                                          const Matrix& h) {
  ProtocolSpec spec =
      heterogeneous_spec(ProtocolKind::kRegulatedSync, std::move(agents),
                         TargetModel{exo.augmented, exo.nq}, k, h);
  spec.exosystem = exo;
  return spec;
}

StepResult protocol1_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const ProtocolSpec& spec) {
  if (spec.kind != ProtocolKind::kFullState) {
    throw ConfigError("protocol1_step requires a full-state spec");
  }
  const Eigen::Index n = spec.A.rows();
  check_size(s.eta, n, "eta");
  check_size(zeta, n, "zeta");
  check_size(zetahat, n, "zetahat");
  StepResult out;
  out.rho = s.eta;
  out.u = -spec.K * s.eta;
  out.state.eta = spec.A * s.eta + spec.B * out.u + spec.A * (zeta - zetahat);
  out.state.xhat = Vector::Zero(0);
  out.state.xi = Vector::Zero(0);
  return out;
}

StepResult protocol2_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const ProtocolSpec& spec) {
  if (spec.kind != ProtocolKind::kPartialState) {
    throw ConfigError("protocol2_step requires a partial-state spec");
  }
  const Eigen::Index n = spec.A.rows();
  check_size(s.eta, n, "eta");
  check_size(s.xhat, n, "xhat");
  check_size(zeta, spec.C.rows(), "zeta");
  check_size(zetahat, n, "zetahat");
  StepResult out;
  out.rho = s.eta;
  out.u = -spec.K * s.eta;
  out.state.eta =
      spec.A * s.eta + spec.B * out.u + spec.A * s.xhat - spec.A * zetahat;
  out.state.xhat = spec.A * s.xhat - spec.B * (spec.K * zetahat) +
                   spec.H * (zeta - spec.C * s.xhat);
  out.state.xi = Vector::Zero(0);
  return out;
}

namespace {

StepResult compensated_step(const ControllerState& s, const Vector& zeta,
                            const Vector& zetahat, const Vector& z,
                            const ProtocolSpec& spec, int agent_index) {
  if (agent_index < 0 ||
      agent_index >= static_cast<int>(spec.compensators.size())) {
    throw ConfigError("protocol step: agent index " + std::to_string(agent_index) +
                      " out of range");
  }
  const Compensator& comp =
      spec.compensators[static_cast<std::size_t>(agent_index)];
  const Eigen::Index n = spec.A.rows();
  check_size(s.eta, n, "eta");
  check_size(s.xhat, n, "xhat");
  check_size(s.xi, comp.Ah.rows(), "xi");
  check_size(zeta, spec.C.rows(), "zeta");
  check_size(zetahat, n, "zetahat");
  check_size(z, comp.Bh.cols(), "z");

  StepResult out;
  out.rho = s.eta;
  const Vector v = -spec.K * s.eta;
  out.u = comp.Ch * s.xi + comp.Dh * v;
  out.state.xi = comp.Ah * s.xi + comp.Bh * z + comp.Eh * v;
  out.state.eta = (spec.A - spec.B * spec.K) * s.eta + spec.A * s.xhat -
                  spec.A * zetahat;
  out.state.xhat = spec.A * s.xhat - spec.B * (spec.K * zetahat) +
                   spec.H * (zeta - spec.C * s.xhat);
  return out;
}

}  // namespace

StepResult protocol3_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const Vector& z,
                          const ProtocolSpec& spec, int agent_index) {
  if (spec.kind != ProtocolKind::kOutputSync) {
    throw ConfigError("protocol3_step requires an output-sync spec");
  }
  return compensated_step(s, zeta, zetahat, z, spec, agent_index);
}

StepResult protocol4_step(const ControllerState& s, const Vector& zetabar,
                          const Vector& zetacheck, const Vector& z,
                          const ProtocolSpec& spec, int agent_index) {
  if (spec.kind != ProtocolKind::kRegulatedSync) {
    throw ConfigError("protocol4_step requires a regulated-sync spec");
  }
  return compensated_step(s, zetabar, zetacheck, z, spec, agent_index);
}

}  // namespace scalefree
