#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace destin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a covariance factorization or likelihood evaluation breaks down.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Bridge construction failed because Q(h) is not factorizable at this step.
class BridgeDegenerateError : public NumericalError {
 public:
  BridgeDegenerateError(const std::string& what, double h)
      : NumericalError(what + " (h=" + std::to_string(h) + ")"), step(h) {}
  double step;
};

/// Track/config input that cannot be parsed; carries a 1-based line number
/// when the source is line oriented.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_number(line) {}
  long line_number;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Cholesky of a symmetric PD matrix, throwing instead of returning garbage.
inline Eigen::LLT<Matrix> safe_llt(const Matrix& a, const char* context) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(context) + ": matrix not positive definite");
  }
  return llt;
}

inline double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// log N(x; mean, cov) for PD cov.
inline double gaussian_log_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const auto n = x.size();
  if (mean.size() != n || cov.rows() != n || cov.cols() != n) {
    throw std::invalid_argument("gaussian_log_pdf: dimension mismatch");
  }
  auto llt = safe_llt(cov, "gaussian_log_pdf");
  const Vector r = x - mean;
  const double maha = r.dot(llt.solve(r));
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + log_det_from_llt(llt) + maha);
}

/// log(sum_i exp(v_i)) over the finite entries; -inf entries are dropped.
/// Returns -inf when no finite entry exists.
inline double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) {
    if (std::isfinite(x) && x > m) m = x;
  }
  if (!std::isfinite(m)) return kNegInf;
  double acc = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) acc += std::exp(x - m);
  }
  return m + std::log(acc);
}

inline bool approx_symmetric(const Matrix& a, double rel_tol = 1e-9) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// PSD within tolerance: eigenvalues >= -tol * trace.
inline bool approx_psd(const Matrix& a, double tol = 1e-9) {
  if (!approx_symmetric(a)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  if (es.info() != Eigen::Success) return false;
  const double floor = -tol * std::max(1.0, std::abs(a.trace()));
  return es.eigenvalues().minCoeff() >= floor;
}

}  // namespace destin
