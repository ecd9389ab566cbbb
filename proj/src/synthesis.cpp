#include "scalefree/synthesis.hpp"

#include <Eigen/QR>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

namespace scalefree {

namespace {

std::string format_complex(std::complex<double> z) {
  std::ostringstream os;
  os << z.real();
  if (z.imag() != 0.0) {
    os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  }
  return os.str();
}

// First eigenvalue with |lambda| >= 1 - tol at which [lambda I - A, M] loses
// row rank, if any.
std::optional<std::complex<double>> pbh_defect(const Matrix& a, const Matrix& m) {
  const Eigen::Index n = a.rows();
  const ComplexVector eigs = eigenvalues(a);
  for (Eigen::Index k = 0; k < eigs.size(); ++k) {
    if (std::abs(eigs(k)) < 1.0 - kUnitDiskTol) continue;
    Eigen::MatrixXcd pencil(n, n + m.cols());
    pencil.leftCols(n) =
        eigs(k) * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
    pencil.rightCols(m.cols()) = m.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-9 * sv(0)) {
      return eigs(k);
    }
  }
  return std::nullopt;
}

}  // namespace

DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, const DareOptions& opts) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != m || r.cols() != m) {
    throw DimensionError("solve_dare: inconsistent dimensions");
  }
  DareSolution sol;
  Matrix p = q;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Matrix btp = b.transpose() * p;
    const Matrix s = r + btp * b;
    const Matrix k = s.ldlt().solve(btp * a);
    Matrix next = q + a.transpose() * p * (a - b * k);
    next = 0.5 * (next + next.transpose().eval());
    const double delta = (next - p).cwiseAbs().maxCoeff();
    sol.deltas.push_back(delta);
    p = next;
    if (delta < opts.tolerance) {
      sol.P = p;
      const Matrix btp2 = b.transpose() * p;
      sol.K = (r + btp2 * b).ldlt().solve(btp2 * a);
      sol.iterations = it + 1;
      return sol;
    }
  }
  throw NumericalError("solve_dare: no convergence within " +
                       std::to_string(opts.max_iterations) +
                       " iterations (last delta = " +
                       std::to_string(sol.deltas.back()) + ")");
}

Matrix design_state_gain(const Matrix& a, const Matrix& b) {
  if (const auto bad = pbh_defect(a, b)) {
    throw SynthesisError("design_state_gain: pair is not stabilizable, PBH rank "
                         "deficiency at eigenvalue " + format_complex(*bad));
  }
  const Eigen::Index n = a.rows();
  const DareSolution sol = solve_dare(a, b, Matrix::Identity(n, n),
                                      Matrix::Identity(b.cols(), b.cols()));
  const double rho = spectral_radius(a - b * sol.K);
  if (!(rho < 1.0 - kUnitDiskTol)) {
    throw SynthesisError("design_state_gain: Riccati gain failed the Schur "
                         "certificate (rho = " + std::to_string(rho) + ")");
  }
  return sol.K;
}

Matrix design_observer_gain(const Matrix& a, const Matrix& c) {
  if (const auto bad = pbh_defect(a.transpose(), c.transpose())) {
    throw SynthesisError("design_observer_gain: pair is not detectable, PBH rank "
                         "deficiency at eigenvalue " + format_complex(*bad));
  }
  const Eigen::Index n = a.rows();
  const DareSolution sol = solve_dare(a.transpose(), c.transpose(),
                                      Matrix::Identity(n, n),
                                      Matrix::Identity(c.rows(), c.rows()));
  Matrix h = sol.K.transpose();
  const double rho = spectral_radius(a - h * c);
  if (!(rho < 1.0 - kUnitDiskTol)) {
    throw SynthesisError("design_observer_gain: Riccati gain failed the Schur "
                         "certificate (rho = " + std::to_string(rho) + ")");
  }
  return h;
}

GainSet GainSet::design(const LtiSystem& sys) {
  Matrix k = design_state_gain(sys.A(), sys.B());
  Matrix h = design_observer_gain(sys.A(), sys.C());
  const double rc = spectral_radius(sys.A() - sys.B() * k);
  const double ro = spectral_radius(sys.A() - h * sys.C());
  return GainSet(std::move(k), std::move(h), rc, ro);
}

GainSet GainSet::certify(const LtiSystem& sys, Matrix k, Matrix h) {
  if (k.rows() != sys.m() || k.cols() != sys.n() || h.rows() != sys.n() ||
      h.cols() != sys.p()) {
    throw DimensionError("GainSet::certify: gain dimensions do not match the system");
  }
  const double rc = spectral_radius(sys.A() - sys.B() * k);
  const double ro = spectral_radius(sys.A() - h * sys.C());
  if (!(rc < 1.0 - kUnitDiskTol)) {
    throw SynthesisError("GainSet::certify: A - BK is not Schur (rho = " +
                         std::to_string(rc) + ")");
  }
  if (!(ro < 1.0 - kUnitDiskTol)) {
    throw SynthesisError("GainSet::certify: A - HC is not Schur (rho = " +
                         std::to_string(ro) + ")");
  }
  return GainSet(std::move(k), std::move(h), rc, ro);
}

TargetModel default_target(int nq) {
  if (nq < 1) {
    throw ConfigError("default_target: nq must be positive");
  }
  Matrix a = Matrix::Zero(nq, nq);
  for (int i = 0; i + 1 < nq; ++i) {
    a(i, i + 1) = 1.0;
  }
  Matrix b = Matrix::Zero(nq, 1);
  b(nq - 1, 0) = 1.0;
  Matrix c = Matrix::Zero(1, nq);
  c(0, 0) = 1.0;
  return TargetModel{LtiSystem(std::move(a), std::move(b), std::move(c)), nq};
}

Vector characteristic_polynomial(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("characteristic_polynomial: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  Vector coeffs = Vector::Zero(n);  // coeffs(j) multiplies z^j; leading 1 implicit
  Matrix m = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const Matrix am = a * m;
    const double ck = -am.trace() / static_cast<double>(k);
    coeffs(n - k) = ck;
    m = am + ck * Matrix::Identity(n, n);
  }
  return coeffs;
}

namespace {

// Real monic polynomial with the given (conjugate-closed) roots; returns
// coefficients of 1, z, ..., z^{n-1}.
Vector polynomial_from_roots(const ComplexVector& roots) {
  std::vector<std::complex<double>> poly{1.0};
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j + 1] += poly[j];
      next[j] -= roots(i) * poly[j];
    }
    poly = std::move(next);
  }
  Vector out(static_cast<Eigen::Index>(poly.size()) - 1);
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const auto cj = poly[static_cast<std::size_t>(j)];
    if (std::abs(cj.imag()) > 1e-9) {
      throw NumericalError("polynomial_from_roots: roots are not conjugate-closed");
    }
    out(j) = cj.real();
  }
  return out;
}

// Companion matrix with subdiagonal ones and last column -coeffs.
Matrix companion_from_polynomial(const Vector& coeffs) {
  const Eigen::Index nz = coeffs.size();
  Matrix z = Matrix::Zero(nz, nz);
  for (Eigen::Index i = 0; i + 1 < nz; ++i) {
    z(i + 1, i) = 1.0;
  }
  for (Eigen::Index i = 0; i < nz; ++i) {
    z(i, nz - 1) = -coeffs(i);
  }
  return z;
}

void require_observer_canonical(const LtiSystem& t) {
  const int nq = t.n();
  const Matrix& a = t.A();
  const Vector coeffs = characteristic_polynomial(a);
  bool ok = t.p() == 1 && t.m() == 1;
  for (int i = 0; ok && i < nq; ++i) {
    ok = std::abs(t.B()(i, 0) - (i == nq - 1 ? 1.0 : 0.0)) <= 1e-12 &&
         std::abs(t.C()(0, i) - (i == 0 ? 1.0 : 0.0)) <= 1e-12;
    for (int j = 0; ok && j < nq; ++j) {
      double want = 0.0;
      if (j == 0) {
        want = -coeffs(nq - 1 - i);
      } else if (j == i + 1) {
        want = 1.0;
      }
      ok = std::abs(a(i, j) - want) <= 1e-12;
    }
  }
  if (!ok) {
    throw SynthesisError("design_precompensator: target must be an "
                         "observer-canonical companion realization");
  }
}

}  // namespace

Compensator design_precompensator(const LtiSystem& agent, const TargetModel& target) {
  if (agent.p() != 1 || agent.m() != 1) {
    throw SynthesisError("design_precompensator: unsupported class, agent must be "
                         "single-input single-output");
  }
  if (!agent.Cm()) {
    throw SynthesisError("design_precompensator: unsupported class, agent must "
                         "carry a local measurement map Cm");
  }
  if (target.system.n() != target.nq) {
    throw DimensionError("design_precompensator: target state dimension must equal nq");
  }
  require_observer_canonical(target.system);

  const StructureReport rep = analyze(agent);
  if (!rep.relative_degree) {
    throw SynthesisError("design_precompensator: unsupported class, transfer "
                         "function is identically zero");
  }
  const int r = *rep.relative_degree;
  const int nq = target.nq;
  if (r > nq) {
    throw SynthesisError("design_precompensator: unsupported class, relative degree " +
                         std::to_string(r) + " exceeds target uniform rank " +
                         std::to_string(nq));
  }
  for (Eigen::Index i = 0; i < rep.invariant_zeros.size(); ++i) {
    if (!(std::abs(rep.invariant_zeros(i)) < 1.0 - kUnitDiskTol)) {
      throw SynthesisError("design_precompensator: unsupported class, invariant zero "
                           "outside the open unit circle at z = " +
                           format_complex(rep.invariant_zeros(i)));
    }
  }
  if (!rep.detectable_via_Cm.value_or(false)) {
    throw SynthesisError("design_precompensator: pair (Cm, A) is not detectable");
  }

  const Matrix& a = agent.A();
  const Matrix& b = agent.B();
  const Matrix& c = agent.C();
  const Matrix& cm = *agent.Cm();
  const int n = agent.n();
  const int q = nq - r;

  // Output chain rows C A^j and the linearizing pair (G, F).
  std::vector<Matrix> ca(static_cast<std::size_t>(nq) + 1);
  ca[0] = c;
  for (int j = 1; j <= nq; ++j) {
    ca[static_cast<std::size_t>(j)] = ca[static_cast<std::size_t>(j - 1)] * a;
  }
  const double markov = (ca[static_cast<std::size_t>(r - 1)] * b)(0, 0);
  const double g = 1.0 / markov;
  const Matrix f = -g * ca[static_cast<std::size_t>(r)];

  const Vector tc = characteristic_polynomial(target.system.A());
  Matrix cy = Matrix::Zero(1, n);
  for (int m = 0; m < r; ++m) {
    cy += tc(m) * ca[static_cast<std::size_t>(m)];
  }

  const Matrix l = design_observer_gain(a, cm);
  const Matrix a_obs = a - l * cm;

  Compensator comp;

  const bool prunable =
      q == 0 && rep.invariant_zeros.size() == 0 &&
      (f - g * cy).cwiseAbs().maxCoeff() == 0.0;

  if (prunable) {
    // The agent already satisfies the target difference equation: u = G v.
    comp.Ah = Matrix::Zero(0, 0);
    comp.Bh = Matrix::Zero(0, cm.rows());
    comp.Ch = Matrix::Zero(1, 0);
    comp.Dh = Matrix::Constant(1, 1, g);
    comp.Eh = Matrix::Zero(0, 1);
    comp.As = Matrix::Zero(0, 0);
    comp.Cs = Matrix::Zero(1, 0);
    comp.rho_As = 0.0;
  } else if (q > 0) {
    const int nx = n + q;
    comp.Ah = Matrix::Zero(nx, nx);
    comp.Ah.topLeftCorner(n, n) = a_obs + b * f;
    comp.Ah.block(0, nx - 1, n, 1) = b * g;           // delta_q feeds the input
    comp.Ah.block(n, 0, 1, n) = -cy;                  // delta_1 update
    for (int j = 1; j <= q; ++j) {
      comp.Ah(n, n + j - 1) = -tc(nq - j);
    }
    for (int j = 1; j < q; ++j) {
      comp.Ah(n + j, n + j - 1) = 1.0;                // delay shift
    }
    comp.Bh = Matrix::Zero(nx, cm.rows());
    comp.Bh.topRows(n) = l;
    comp.Eh = Matrix::Zero(nx, 1);
    comp.Eh(n, 0) = 1.0;
    comp.Ch = Matrix::Zero(1, nx);
    comp.Ch.leftCols(n) = f;
    comp.Ch(0, nx - 1) = g;
    comp.Dh = Matrix::Zero(1, 1);
  } else {
    const Matrix f2 = f - g * cy;
    comp.Ah = a_obs + b * f2;
    comp.Bh = l;
    comp.Eh = b * g;
    comp.Ch = f2;
    comp.Dh = Matrix::Constant(1, 1, g);
  }

  if (!prunable) {
    // Residual: observer error drives the output mismatch; the agent's zero
    // dynamics ride along as an uncoupled Schur block.
    Matrix pow = Matrix::Identity(n, n);
    for (int t = 0; t < q; ++t) pow = pow * a_obs;    // (A - L Cm)^q
    Matrix cs_obs = ca[static_cast<std::size_t>(r)] * pow;
    for (int m = 0; m < r; ++m) {
      cs_obs += tc(m) * ca[static_cast<std::size_t>(m)];
    }
    Matrix mid = Matrix::Identity(n, n);
    for (int m = r; m < nq; ++m) {
      cs_obs += tc(m) * ca[static_cast<std::size_t>(r)] * mid;
      mid = mid * a_obs;
    }

    const Eigen::Index nz = rep.invariant_zeros.size();
    const Matrix zblock =
        nz > 0 ? companion_from_polynomial(polynomial_from_roots(rep.invariant_zeros))
               : Matrix::Zero(0, 0);
    comp.As = Matrix::Zero(n + nz, n + nz);
    comp.As.topLeftCorner(n, n) = a_obs;
    comp.As.bottomRightCorner(nz, nz) = zblock;
    comp.Cs = Matrix::Zero(1, n + nz);
    comp.Cs.leftCols(n) = cs_obs;
    comp.rho_As = spectral_radius(comp.As);
    if (!(comp.rho_As < 1.0 - kUnitDiskTol)) {
      throw SynthesisError("design_precompensator: residual block failed the Schur "
                           "certificate (rho = " + std::to_string(comp.rho_As) + ")");
    }
  }

  // Homogenized-state immersion: future outputs as causal functions of
  // (x, xi), then the unit lower-triangular Toeplitz combination that
  // reconstructs the observer-canonical target state.
  const int xd = comp.xi_dim();
  Matrix yp = Matrix::Zero(nq, n);
  Matrix yc = Matrix::Zero(nq, xd);
  for (int j = 0; j < r && j < nq; ++j) {
    yp.row(j) = ca[static_cast<std::size_t>(j)];
  }
  if (!prunable && q > 0) {
    Matrix ej = ca[static_cast<std::size_t>(r)];
    for (int j = r; j < nq; ++j) {
      yp.row(j) = ej;
      yc.block(j, 0, 1, n) = -ej;
      yc(j, n + (nq - j) - 1) = 1.0;
      ej = ej * a_obs;
    }
  }
  Matrix toeplitz = Matrix::Identity(nq, nq);
  for (int i = 0; i < nq; ++i) {
    for (int t = 1; t <= i; ++t) {
      toeplitz(i, i - t) = tc(nq - t);
    }
  }
  comp.target_from_plant = toeplitz * yp;
  comp.target_from_comp = toeplitz * yc;

  const int ns = comp.resid_dim();
  comp.resid_from_plant = Matrix::Zero(ns, n);
  comp.resid_from_comp = Matrix::Zero(ns, xd);
  if (!prunable) {
    comp.resid_from_plant.topLeftCorner(n, n) = Matrix::Identity(n, n);
    comp.resid_from_comp.topLeftCorner(n, n) = -Matrix::Identity(n, n);
  }
  return comp;
}

ExosystemSpec augment_exosystem(const Matrix& cr, const Matrix& ar, int nq) {
  if (ar.rows() != ar.cols() || ar.rows() < 1) {
    throw DimensionError("augment_exosystem: Ar must be square and nonempty");
  }
  if (cr.rows() != 1 || cr.cols() != ar.rows()) {
    throw SynthesisError("augment_exosystem: unsupported class, exosystem output "
                         "must be scalar with Cr matching Ar");
  }
  const int r = static_cast<int>(ar.rows());

  Matrix obs(r, r);
  Matrix row = cr;
  for (int j = 0; j < r; ++j) {
    obs.row(j) = row;
    row = row * ar;
  }
  Eigen::JacobiSVD<Matrix> svd(obs);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-9 * sv(0)) {
    throw SynthesisError("augment_exosystem: pair (Cr, Ar) is not observable");
  }
  const double rho_ar = spectral_radius(ar);
  if (!(rho_ar <= 1.0 + kUnitDiskTol)) {
    throw SynthesisError("augment_exosystem: exosystem eigenvalues must lie in the "
                         "closed unit disk (rho = " + std::to_string(rho_ar) + ")");
  }
  if (nq < r) {
    throw SynthesisError("augment_exosystem: uniform rank nq = " + std::to_string(nq) +
                         " is below the observability index " + std::to_string(r) +
                         " of the exosystem");
  }

  const Vector chi = characteristic_polynomial(ar);
  Vector chi_check = Vector::Zero(nq);  // z^(nq-r) * charpoly(Ar)
  for (int j = 0; j < r; ++j) {
    chi_check(nq - r + j) = chi(j);
  }
  Matrix a_check = Matrix::Zero(nq, nq);
  for (int i = 0; i < nq; ++i) {
    a_check(i, 0) = -chi_check(nq - 1 - i);
    if (i + 1 < nq) {
      a_check(i, i + 1) = 1.0;
    }
  }
  Matrix b_check = Matrix::Zero(nq, 1);
  b_check(nq - 1, 0) = 1.0;
  Matrix c_check = Matrix::Zero(1, nq);
  c_check(0, 0) = 1.0;

  Matrix obs_check(nq, nq);
  Matrix obs_orig(nq, r);
  Matrix rc = c_check;
  Matrix ro = cr;
  for (int j = 0; j < nq; ++j) {
    obs_check.row(j) = rc;
    obs_orig.row(j) = ro;
    rc = rc * a_check;
    ro = ro * ar;
  }
  Matrix lift = obs_check.colPivHouseholderQr().solve(obs_orig);
  const double residual = (obs_check * lift - obs_orig).cwiseAbs().maxCoeff();
  if (residual > 1e-8) {
    throw SynthesisError("augment_exosystem: output-matching solve residual " +
                         std::to_string(residual) + " exceeds 1e-8");
  }
  const double commute = (lift * ar - a_check * lift).cwiseAbs().maxCoeff();
  if (commute > 1e-9) {
    throw ConsistencyError("augment_exosystem: lift does not intertwine the "
                           "exosystem dynamics (defect " + std::to_string(commute) + ")");
  }

  ExosystemSpec spec{ar, cr, LtiSystem(a_check, b_check, c_check), lift, nq};

  const StructureReport rep = analyze(spec.augmented);
  if (rep.uniform_rank != nq || rep.invariant_zeros.size() != 0 ||
      !rep.A_in_closed_unit_disk) {
    throw ConsistencyError("augment_exosystem: augmented triple failed its "
                           "structural checks");
  }
  return spec;
}

}  // namespace scalefree
