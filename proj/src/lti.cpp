#include "scalefree/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <complex>
#include <utility>
#include <vector>

#include "json_util.hpp"

namespace scalefree {

LtiSystem::LtiSystem(Matrix a, Matrix b, Matrix c, std::optional<Matrix> cm)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), cm_(std::move(cm)) {
  if (a_.rows() != a_.cols()) {
    throw DimensionError("LtiSystem: A must be square");
  }
  if (b_.rows() != a_.rows()) {
    throw DimensionError("LtiSystem: B row count must match A");
  }
  if (c_.cols() != a_.cols()) {
    throw DimensionError("LtiSystem: C column count must match A");
  }
  if (cm_ && cm_->cols() != a_.cols()) {
    throw DimensionError("LtiSystem: Cm column count must match A");
  }
}

namespace {

Eigen::Index complex_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = rel_tol * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  return r;
}

// PBH at the eigenvalues selected by `pick`: rank [lambda I - A, M] == n,
// with M = B for stabilizability and M = C^T for detectability (dual).
template <typename Pick>
bool pbh_holds(const Matrix& a, const Matrix& m, double rank_rel_tol, Pick pick) {
  const Eigen::Index n = a.rows();
  const ComplexVector eigs = eigenvalues(a);
  Eigen::MatrixXcd pencil(n, n + m.cols());
  for (Eigen::Index k = 0; k < eigs.size(); ++k) {
    if (!pick(eigs(k))) continue;
    pencil.leftCols(n) =
        eigs(k) * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
    pencil.rightCols(m.cols()) = m.cast<std::complex<double>>();
    if (complex_rank(pencil, rank_rel_tol) < n) {
      return false;
    }
  }
  return true;
}

bool markov_nonzero(const Matrix& mk) {
  return mk.cwiseAbs().maxCoeff() > 1e-12;
}

}  // namespace

ComplexVector invariant_zeros(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  const Eigen::Index p = c.rows();
  if (p != m) {
    throw DimensionError("invariant_zeros: pencil is non-square (p != m)");
  }
  // Rosenbrock pencil z*M2 - M1 with M1 = [[A, B], [-C, 0]], M2 = [[I, 0], [0, 0]].
  Matrix m1 = Matrix::Zero(n + p, n + m);
  m1.topLeftCorner(n, n) = a;
  m1.topRightCorner(n, m) = b;
  m1.bottomLeftCorner(p, n) = -c;
  Matrix m2 = Matrix::Zero(n + p, n + m);
  m2.topLeftCorner(n, n) = Matrix::Identity(n, n);
  Eigen::GeneralizedEigenSolver<Matrix> qz(m1, m2, /*computeEigenvectors=*/false);
  if (qz.info() != Eigen::Success) {
    throw NumericalError("invariant_zeros: QZ iteration did not converge");
  }
  std::vector<std::complex<double>> finite;
  for (Eigen::Index i = 0; i < qz.betas().size(); ++i) {
    const double beta = std::abs(qz.betas()(i));
    const double alpha = std::abs(qz.alphas()(i));
    // beta ~ 0 marks an infinite zero; alpha ~ beta ~ 0 an indeterminate
    // direction of a degenerate pencil. Both are excluded.
    if (beta > 1e-9 * (1.0 + alpha)) {
      finite.push_back(qz.alphas()(i) / qz.betas()(i));
    }
  }
  ComplexVector out(static_cast<Eigen::Index>(finite.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = finite[static_cast<std::size_t>(i)];
  }
  return out;
}

bool pbh_controllable(const Matrix& a, const Matrix& b, double rank_rel_tol) {
  return pbh_holds(a, b, rank_rel_tol, [](std::complex<double>) { return true; });
}

StructureReport analyze(const LtiSystem& sys, const AnalyzeOptions& opts) {
  StructureReport rep;
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix& c = sys.C();
  const int n = sys.n();

  rep.eigenvalues_of_A = eigenvalues(a);
  const double rho = rep.eigenvalues_of_A.cwiseAbs().maxCoeff();
  rep.A_in_closed_unit_disk = rho <= 1.0 + opts.unit_circle_tol;

  const auto unstable = [&](std::complex<double> z) {
    return std::abs(z) >= 1.0 - opts.unit_circle_tol;
  };
  rep.stabilizable = pbh_holds(a, b, opts.rank_rel_tol, unstable);
  rep.detectable = pbh_holds(a.transpose(), c.transpose(), opts.rank_rel_tol, unstable);
  if (sys.Cm()) {
    rep.detectable_via_Cm =
        pbh_holds(a.transpose(), sys.Cm()->transpose(), opts.rank_rel_tol, unstable);
  }

  if (sys.p() == sys.m()) {
    rep.invariant_zeros = invariant_zeros(a, b, c);
  }

  // Markov-parameter scan up to depth 2n.
  Matrix power = Matrix::Identity(n, n);
  std::optional<int> first_nonzero;
  Matrix leading;
  for (int k = 1; k <= 2 * n; ++k) {
    const Matrix mk = c * power * b;
    if (markov_nonzero(mk)) {
      first_nonzero = k;
      leading = mk;
      break;
    }
    power = a * power;
  }

  const bool siso = sys.p() == 1 && sys.m() == 1;
  if (siso) {
    rep.relative_degree = first_nonzero;
    rep.right_invertible = first_nonzero ? Ternary::kYes : Ternary::kNo;
  } else {
    rep.right_invertible = Ternary::kUndetermined;
  }
  if (first_nonzero && sys.p() == sys.m()) {
    Eigen::JacobiSVD<Matrix> svd(leading);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > opts.rank_rel_tol * sv(0)) {
      rep.uniform_rank = first_nonzero;
      rep.right_invertible = Ternary::kYes;
    }
  }
  return rep;
}

bool is_schur(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("is_schur: matrix must be square");
  }
  if (m.rows() == 0) {
    return true;
  }
  return spectral_radius(m) < 1.0 - tol;
}

LtiSystem parse_system_file(const std::string& text) {
  const auto doc = detail::parse_json(text, "system file");
  detail::require_object(doc, "system file");
  detail::require_allowed_keys(doc, {"A", "B", "C", "Cm"}, "system file");
  Matrix a = detail::as_matrix(detail::require_key(doc, "A", "system file"), "A");
  Matrix b = detail::as_matrix(detail::require_key(doc, "B", "system file"), "B");
  Matrix c = detail::as_matrix(detail::require_key(doc, "C", "system file"), "C");
  std::optional<Matrix> cm;
  if (doc.contains("Cm")) {
    cm = detail::as_matrix(doc.at("Cm"), "Cm");
  }
  return LtiSystem(std::move(a), std::move(b), std::move(c), std::move(cm));
}

std::string format_system_file(const LtiSystem& sys) {
  nlohmann::json doc;
  doc["A"] = detail::matrix_to_json(sys.A());
  doc["B"] = detail::matrix_to_json(sys.B());
  doc["C"] = detail::matrix_to_json(sys.C());
  if (sys.Cm()) {
    doc["Cm"] = detail::matrix_to_json(*sys.Cm());
  }
  return doc.dump(2) + "\n";
}

}  // namespace scalefree
