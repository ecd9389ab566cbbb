#include "scalefree/common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <vector>

namespace scalefree {

ComplexVector eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eigenvalues: matrix is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected square");
  }
  if (m.rows() == 0) {
    return ComplexVector(0);
  }
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge");
  }
  return solver.eigenvalues();
}

double spectral_radius(const Matrix& m) {
  if (m.rows() == 0) {
    return 0.0;
  }
  return eigenvalues(m).cwiseAbs().maxCoeff();
}

double multiset_match_distance(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("multiset_match_distance: sizes differ");
  }
  std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = -1.0;
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(a(i) - b(j));
      if (best_j < 0 || d < best) {
        best = d;
        best_j = j;
      }
    }
    used[static_cast<std::size_t>(best_j)] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

double UniformRng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int UniformRng::below(int n) {
  return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
}

}  // namespace scalefree
