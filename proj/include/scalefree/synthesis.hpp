#pragma once

#include <vector>

#include "scalefree/common.hpp"
#include "scalefree/lti.hpp"

namespace scalefree {

struct DareOptions {
  double tolerance = 1e-12;   // stop when ||P_{k+1} - P_k||_inf drops below
  int max_iterations = 10000;
};

struct DareSolution {
  Matrix P;
  Matrix K;                    // (R + B'PB)^-1 B'PA
  int iterations = 0;
  std::vector<double> deltas;  // ||P_{k+1} - P_k||_inf per iteration
};

/// Fixed-point iteration for the discrete algebraic Riccati equation,
/// P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA, started at P = Q.
/// Throws NumericalError when the iteration does not converge; the returned
/// gain is never trusted from the iteration alone (callers certify it).
DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, const DareOptions& opts = {});

/// Stabilizing state-feedback gain via the DARE with Q = R = I; A - BK is
/// certified Schur before returning. Non-stabilizable pairs are rejected
/// with the offending eigenvalue in the message.
Matrix design_state_gain(const Matrix& a, const Matrix& b);

inline Matrix design_state_gain(const LtiSystem& sys) {
  return design_state_gain(sys.A(), sys.B());
}

/// Observer gain via the dual design: H = design_state_gain(A', C')'.
Matrix design_observer_gain(const Matrix& a, const Matrix& c);

/// A state-feedback/observer gain pair with passing Schur certificates.
/// There is no way to construct one whose certificates fail.
class GainSet {
 public:
  /// Designs both gains for the system via the Riccati recipes.
  static GainSet design(const LtiSystem& sys);

  /// Adopts externally supplied gains; throws SynthesisError unless both
  /// A - BK and A - HC are Schur.
  static GainSet certify(const LtiSystem& sys, Matrix k, Matrix h);

  const Matrix& K() const { return k_; }
  const Matrix& H() const { return h_; }
  double rho_control() const { return rho_control_; }
  double rho_observer() const { return rho_observer_; }

 private:
  GainSet(Matrix k, Matrix h, double rc, double ro)
      : k_(std::move(k)), h_(std::move(h)), rho_control_(rc), rho_observer_(ro) {}
  Matrix k_, h_;
  double rho_control_, rho_observer_;
};

/// The homogeneous design triple every agent is shaped into, plus its
/// uniform rank.
struct TargetModel {
  LtiSystem system;
  int nq;
};

/// Chain-of-delays target: A = upper shift of size nq, B = last unit
/// column, C = first unit row; transfer z^-nq, no invariant zeros.
TargetModel default_target(int nq);

/// Monic characteristic polynomial coefficients (c_0, ..., c_{n-1}) of a
/// square matrix, leading coefficient 1 implicit (Faddeev-LeVerrier).
Vector characteristic_polynomial(const Matrix& a);

/// Local pre-compensator
///   xi+ = Ah xi + Bh z + Eh v,   u = Ch xi + Dh v
/// shaping an agent into the target model up to an additive input
/// disturbance d(k) = Cs w(k), w+ = As w, As Schur. The maps
/// target_from_plant/_comp give the homogenized target state as a linear
/// function of (agent state, compensator state); resid_from_plant/_comp
/// give w the same way. With matched initial conditions the cascade output
/// equals the disturbed target output exactly.
struct Compensator {
  Matrix Ah, Bh, Ch, Dh, Eh;
  Matrix As, Cs;
  double rho_As = 0.0;
  Matrix target_from_plant, target_from_comp;
  Matrix resid_from_plant, resid_from_comp;

  int xi_dim() const { return static_cast<int>(Ah.rows()); }
  int resid_dim() const { return static_cast<int>(As.rows()); }
};

/// Builds the pre-compensator for one agent. Supported class: SISO,
/// right-invertible, relative degree r <= target nq, all invariant zeros
/// strictly inside the unit circle, local measurement Cm present with
/// (Cm, A) detectable, and a target with unit leading Markov parameter.
/// Violations raise SynthesisError naming the failed precondition.
Compensator design_precompensator(const LtiSystem& agent, const TargetModel& target);

/// Exosystem x_r+ = Ar x_r, y_r = Cr x_r together with its uniform-rank-nq
/// augmentation (Cr_check, Ar_check, Br_check) and the initial-condition
/// lift x_r0 -> x_check_r0 under which both produce identical outputs.
struct ExosystemSpec {
  Matrix Ar, Cr;
  LtiSystem augmented;
  Matrix lift;
  int nq;
};

/// Augments a scalar-output exosystem to an invertible triple of uniform
/// rank nq: Ar_check is the observer-canonical companion of
/// z^(nq - dim Ar) * charpoly(Ar), Cr_check the first unit row, Br_check
/// the last unit column. Requires (Cr, Ar) observable, eigenvalues of Ar
/// in the closed unit disk, and nq >= dim Ar (the observability index of
/// an observable single-output pair).
ExosystemSpec augment_exosystem(const Matrix& cr, const Matrix& ar, int nq);

}  // namespace scalefree
