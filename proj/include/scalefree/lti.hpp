#pragma once

#include <optional>
#include <string>

#include "scalefree/common.hpp"

namespace scalefree {

/// Discrete-time state-space model x+ = Ax + Bu, y = Cx, with an optional
/// local measurement map z = Cm x for introspective agents.
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix b, Matrix c, std::optional<Matrix> cm = std::nullopt);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const std::optional<Matrix>& Cm() const { return cm_; }

  int n() const { return static_cast<int>(a_.rows()); }  // state dimension
  int m() const { return static_cast<int>(b_.cols()); }  // input dimension
  int p() const { return static_cast<int>(c_.rows()); }  // output dimension

 private:
  Matrix a_, b_, c_;
  std::optional<Matrix> cm_;
};

enum class Ternary { kYes, kNo, kUndetermined };

/// Structural facts about a system, as needed by the protocol hypotheses.
struct StructureReport {
  bool stabilizable = false;
  bool detectable = false;                     // via C
  std::optional<bool> detectable_via_Cm;       // absent when Cm is absent
  ComplexVector invariant_zeros;
  std::optional<int> relative_degree;          // SISO only
  std::optional<int> uniform_rank;
  Ternary right_invertible = Ternary::kUndetermined;
  ComplexVector eigenvalues_of_A;
  bool A_in_closed_unit_disk = false;          // max|lambda| <= 1 + tol
};

struct AnalyzeOptions {
  double unit_circle_tol = kUnitDiskTol;
  // Rank decisions: singular values below rank_rel_tol * sigma_max count as
  // zero.
  double rank_rel_tol = 1e-9;
};

/// Stabilizability and detectability are decided by PBH rank tests at every
/// eigenvalue with |lambda| >= 1 - tol; invariant zeros come from the finite
/// generalized eigenvalues of the Rosenbrock pencil; relative degree and
/// right-invertibility from the Markov parameters C A^k B with the search
/// horizon 2n (Cayley-Hamilton bounds the needed depth). MIMO systems whose
/// leading nonzero Markov parameter is not square invertible get
/// right_invertible = kUndetermined rather than a guess.
StructureReport analyze(const LtiSystem& sys, const AnalyzeOptions& opts = {});

/// True iff max|lambda(m)| < 1 - tol. Empty matrix counts as Schur.
bool is_schur(const Matrix& m, double tol = kUnitDiskTol);

/// Finite generalized eigenvalues of [[zI-A, -B], [C, 0]].
ComplexVector invariant_zeros(const Matrix& a, const Matrix& b, const Matrix& c);

/// PBH test over every eigenvalue: rank [lambda I - A, B] = n for all
/// lambda (controllability when unrestricted).
bool pbh_controllable(const Matrix& a, const Matrix& b, double rank_rel_tol = 1e-9);

/// Parses the on-disk system format: a JSON object with row-major matrices
/// "A", "B", "C" and optionally "Cm". Dimension checks are delegated to the
/// LtiSystem constructor; unknown keys are rejected.
LtiSystem parse_system_file(const std::string& text);

/// Inverse of parse_system_file. Entries survive a round-trip bit-exactly.
std::string format_system_file(const LtiSystem& sys);

}  // namespace scalefree
