#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace scalefree {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix/vector dimensions in an operation's inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to converge (eigenvalue iteration, Riccati
/// fixed point). Never silently mapped to a boolean result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Gain or compensator design failed (non-stabilizable pair, unsupported
/// agent class, failed Schur certificate).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Graph-structural precondition refused (no directed spanning tree, root
/// set does not reach every node). Distinct from an unstable certificate.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Simulation state exceeded the divergence guard.
class DivergedError : public Error {
 public:
  using Error::Error;
};

/// Two independent computations of the same quantity disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Strictness margin for unit-disk predicates: |lambda| < 1 - kUnitDiskTol.
inline constexpr double kUnitDiskTol = 1e-9;

/// Any simulated state with |entry| above this aborts the run as diverged.
inline constexpr double kDivergenceLimit = 1e12;

/// Eigenvalues of a square real matrix, complex-conjugate paired.
/// Throws NumericalError if the QR iteration does not converge.
ComplexVector eigenvalues(const Matrix& m);

/// max |lambda_i(m)|.
double spectral_radius(const Matrix& m);

/// Greedy minimal-distance bipartite matching between two complex multisets
/// of equal size; returns the largest matched distance. Adequate for the
/// n <= 16 sizes used here.
double multiset_match_distance(const ComplexVector& a, const ComplexVector& b);

/// Deterministic uniform draws on [-1, 1]. Wraps std::mt19937_64 (a fixed,
/// portable algorithm) with an explicit 53-bit mapping so that sequences are
/// bit-identical across platforms; the distribution classes of the standard
/// library do not guarantee that.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1): top 53 bits of one engine word, scaled by 2^-53.
  double unit();

  /// Uniform on [-1, 1].
  double symmetric() { return 2.0 * unit() - 1.0; }

  /// Uniform on [lo, hi].
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform integer in {0, ..., n-1} by rejection-free modulo; n must be
  /// small relative to 2^64 (graph sizes here), so the bias is negligible
  /// and the result stays platform-independent.
  int below(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace scalefree
