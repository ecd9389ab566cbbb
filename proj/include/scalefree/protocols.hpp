#pragma once

#include <optional>
#include <vector>

#include "scalefree/common.hpp"
#include "scalefree/lti.hpp"
#include "scalefree/synthesis.hpp"

namespace scalefree {

/// The four coupling laws, numbered as in the user-facing configs.
enum class ProtocolKind {
  kFullState = 1,     // state coupling, homogeneous agents
  kPartialState = 2,  // output coupling with local observers, homogeneous
  kOutputSync = 3,    // heterogeneous output synchronization
  kRegulatedSync = 4  // heterogeneous regulated output synchronization
};

int protocol_index(ProtocolKind kind);
ProtocolKind protocol_kind_from_index(int index);  // 1..4, else ConfigError

/// Per-agent controller memory. Unused parts stay zero-sized: kind 1 uses
/// eta only, kind 2 adds xhat, kinds 3 and 4 add the pre-compensator xi.
struct ControllerState {
  Vector eta;
  Vector xhat;
  Vector xi;
};

/// One synchronous controller update.
struct StepResult {
  ControllerState state;  // post-update memory
  Vector u;               // input applied at this step
  Vector rho;             // value broadcast at this step (the incoming eta)
};

/// Everything a controller step needs, fixed at design time. For kinds 1
/// and 2, (A, B, C) is the shared agent model; for kinds 3 and 4 it is the
/// homogenized target triple all agents are shaped into. K and H carry
/// recorded spectral-radius certificates; recording is unconditional, so a
/// spec can describe an unstable design (run-time admission is the
/// simulator's decision, not this type's).
struct ProtocolSpec {
  ProtocolKind kind;
  Matrix A, B, C;
  Matrix K;              // state-feedback gain for (A, B)
  Matrix H;              // observer gain for (A, C); empty for kind 1
  double rho_control = 0.0;   // spectral radius of A - BK
  double rho_observer = 0.0;  // spectral radius of A - HC; 0 when H is empty

  std::vector<LtiSystem> agents;          // kinds 3-4: the physical agents
  std::vector<Compensator> compensators;  // kinds 3-4, parallel to agents
  std::optional<ExosystemSpec> exosystem; // kind 4

  int model_dim() const { return static_cast<int>(A.rows()); }

  /// Zero controller memory sized for the given agent.
  ControllerState initial_state(int agent_index) const;

  static ProtocolSpec full_state(const LtiSystem& model, const Matrix& k);
  static ProtocolSpec partial_state(const LtiSystem& model, const Matrix& k,
                                    const Matrix& h);
  /// Builds one pre-compensator per agent against the target.
  static ProtocolSpec output_sync(std::vector<LtiSystem> agents,
                                  const TargetModel& target, const Matrix& k,
                                  const Matrix& h);
  /// Target is the exosystem's uniform-rank augmentation.
  static ProtocolSpec regulated_sync(std::vector<LtiSystem> agents,
                                     const ExosystemSpec& exo, const Matrix& k,
                                     const Matrix& h);
};

/// u = -K eta, eta+ = (A - BK) eta + A (zeta - zetahat).
/// zeta couples states, zetahat couples broadcast controller states.
StepResult protocol1_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const ProtocolSpec& spec);

/// u = -K eta, eta+ = (A - BK) eta + A xhat - A zetahat,
/// xhat+ = A xhat - BK zetahat + H (zeta - C xhat); zeta couples outputs.
StepResult protocol2_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const ProtocolSpec& spec);

/// Pre-compensated agent driven by v = -K eta, observer on the output
/// disagreement, eta as in kind 2; z is the agent's local measurement.
StepResult protocol3_step(const ControllerState& s, const Vector& zeta,
                          const Vector& zetahat, const Vector& z,
                          const ProtocolSpec& spec, int agent_index);

/// Regulated variant: zetabar couples reference-relative outputs through
/// the rooted weights, zetacheck couples broadcasts the same way, and the
/// observer/feedback run on the augmented target triple.
StepResult protocol4_step(const ControllerState& s, const Vector& zetabar,
                          const Vector& zetacheck, const Vector& z,
                          const ProtocolSpec& spec, int agent_index);

}  // namespace scalefree
