#pragma once

// Dense linear-algebra kernels shared by every solver component.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ncphom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative pivot threshold: a pivot below kPivotTol * ||A||_inf counts as zero.
inline constexpr double kPivotTol = 1e-14;

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a point falls outside the region where a problem's f is defined.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SignLogDet {
  int sign = 0;  // -1, 0 or +1
  double log_abs_det = -std::numeric_limits<double>::infinity();
};

inline double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Induced infinity norm (max absolute row sum).
inline double inf_norm(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

namespace detail {

struct Factorization {
  Eigen::PartialPivLU<Mat> lu;
  double min_pivot = 0.0;
  double threshold = 0.0;
  bool singular() const { return !(min_pivot >= threshold) || min_pivot == 0.0; }
};

inline Factorization factor(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix is not square");
  Factorization f{Eigen::PartialPivLU<Mat>(a)};
  f.threshold = kPivotTol * inf_norm(a);
  f.min_pivot = a.rows() == 0 ? 1.0 : f.lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  return f;
}

}  // namespace detail

/// Solves A x = b by LU with partial pivoting.
inline Vec lu_solve(const Mat& a, const Vec& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("lu_solve: dimension mismatch");
  auto f = detail::factor(a);
  if (f.singular()) throw SingularMatrix("lu_solve: pivot below threshold");
  return f.lu.solve(b);
}

/// Sign and log-magnitude of det(A). Singular matrices report sign 0.
inline SignLogDet sign_logdet(const Mat& a) {
  auto f = detail::factor(a);
  if (f.singular()) return {};
  SignLogDet out{static_cast<int>(f.lu.permutationP().determinant()), 0.0};
  const auto diag = f.lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] < 0) out.sign = -out.sign;
    out.log_abs_det += std::log(std::abs(diag[i]));
  }
  return out;
}

/// Minimum-norm least-squares solution J^+ r for a full-row-rank J (rows <= cols),
/// computed as J^T (J J^T)^{-1} r.
///
/// Rows of J and r are first scaled to unit length. For full row rank the
/// solution set of J y = r, and so its minimum-norm element, is unchanged.
inline Vec pseudoinverse_apply(const Mat& j, const Vec& r) {
  if (r.size() != j.rows()) throw std::invalid_argument("pseudoinverse_apply: dimension mismatch");
  const Vec row_norms = j.rowwise().norm();
  if (j.rows() > 0 && !(row_norms.minCoeff() > 0)) throw RankDeficient("pseudoinverse_apply: zero row");
  const Mat js = row_norms.cwiseInverse().asDiagonal() * j;
  const Vec rs = r.cwiseQuotient(row_norms);
  const Mat gram = js * js.transpose();
  try {
    return js.transpose() * lu_solve(gram, rs);
  } catch (const SingularMatrix&) {
    throw RankDeficient("pseudoinverse_apply: J J^T is singular");
  }
}

/// Central-difference Jacobian with step cbrt(eps) * max(1, |x_j|).
template <class F>
Mat fd_jacobian(F&& f, const Vec& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  const auto n = x.size();
  Mat jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = base * std::max(1.0, std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    if (j == 0) jac.resize(fp.size(), n);
    jac.col(j) = (fp - fm) / (xp[j] - xm[j]);
  }
  return jac;
}

}  // namespace ncphom
