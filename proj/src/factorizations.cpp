#include "householder.hpp"
#include "rmarkov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace rmarkov {
namespace detail {

template <typename Scalar>
QrFactors<Scalar> householder_qr(const Matrix<Scalar>& a) {
  require_finite(a, "householder_qr");
  const Index m = a.rows();
  const Index n = a.cols();
  if (m < n) {
    throw std::invalid_argument("householder_qr: requires rows >= cols");
  }
  Matrix<Scalar> work = a;
  std::vector<Reflector<Scalar>> reflectors;
  reflectors.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    auto h = make_reflector<Scalar>(work.col(k).tail(m - k));
    if (k + 1 < n) {
      apply_left(h, work.bottomRightCorner(m - k, n - k - 1));
    }
    work(k, k) = Scalar(h.beta);
    work.col(k).tail(m - k - 1).setZero();
    reflectors.push_back(std::move(h));
  }

  QrFactors<Scalar> out;
  out.r = work.topRows(n).template triangularView<Eigen::Upper>();
  out.q = Matrix<Scalar>::Identity(m, n);
  for (Index k = n - 1; k >= 0; --k) {
    apply_left_unconjugated(reflectors[static_cast<std::size_t>(k)],
                            out.q.bottomRightCorner(m - k, n - k));
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> hessenberg_reduce(const Matrix<Scalar>& a) {
  require_finite(a, "hessenberg_reduce");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("hessenberg_reduce: matrix must be square");
  }
  const Index n = a.rows();
  Matrix<Scalar> h = a;
  for (Index k = 0; k + 2 < n; ++k) {
    const Index len = n - k - 1;
    const auto r = make_reflector<Scalar>(h.col(k).tail(len));
    apply_left(r, h.bottomRightCorner(len, n - k - 1));
    apply_right(r, h.rightCols(len));
    h(k + 1, k) = Scalar(r.beta);
    h.col(k).tail(len - 1).setZero();
  }
  return h;
}

template <typename Scalar>
double abs_determinant(const Matrix<Scalar>& a) {
  require_finite(a, "abs_determinant");
  const Index n = a.rows();
  if (n != a.cols()) {
    throw std::invalid_argument("abs_determinant: matrix must be square");
  }
  Matrix<Scalar> work = a;
  double det = 1.0;
  for (Index k = 0; k < n; ++k) {
    const auto h = make_reflector<Scalar>(work.col(k).tail(n - k));
    if (k + 1 < n) {
      apply_left(h, work.bottomRightCorner(n - k, n - k - 1));
    }
    det *= std::abs(h.beta);
  }
  return det;
}

template QrFactors<double> householder_qr<double>(const Matrix<double>&);
template QrFactors<Complex> householder_qr<Complex>(const Matrix<Complex>&);
template Matrix<double> hessenberg_reduce<double>(const Matrix<double>&);
template Matrix<Complex> hessenberg_reduce<Complex>(const Matrix<Complex>&);
template double abs_determinant<double>(const Matrix<double>&);
template double abs_determinant<Complex>(const Matrix<Complex>&);

}  // namespace detail

template <typename Scalar>
SpanProjector<Scalar>::SpanProjector(Index dimension, const Matrix<Scalar>& basis)
    : dimension_(dimension) {
  if (basis.cols() > 0 && basis.rows() != dimension) {
    throw std::invalid_argument("SpanProjector: basis vectors must match the dimension");
  }
  if (basis.cols() == 0) {
    orthonormal_.resize(dimension, 0);
    return;
  }
  require_finite(basis, "SpanProjector basis");

  // Householder QR with column pivoting; stop at the numerical rank.
  Matrix<Scalar> work = basis;
  const Index m = work.rows();
  const Index cols = work.cols();
  const Index steps = std::min(m, cols);
  const double reference = work.colwise().norm().maxCoeff();
  std::vector<detail::Reflector<Scalar>> reflectors;
  for (Index k = 0; k < steps; ++k) {
    Index pivot = k;
    double best = -1.0;
    for (Index j = k; j < cols; ++j) {
      const double norm = work.col(j).tail(m - k).norm();
      if (norm > best) {
        best = norm;
        pivot = j;
      }
    }
    if (best <= 1e-12 * reference) break;
    work.col(k).swap(work.col(pivot));
    auto h = detail::make_reflector<Scalar>(work.col(k).tail(m - k));
    if (k + 1 < cols) {
      detail::apply_left(h, work.bottomRightCorner(m - k, cols - k - 1));
    }
    reflectors.push_back(std::move(h));
  }

  const auto rank = static_cast<Index>(reflectors.size());
  orthonormal_ = Matrix<Scalar>::Identity(m, rank);
  for (Index k = rank - 1; k >= 0; --k) {
    detail::apply_left_unconjugated(reflectors[static_cast<std::size_t>(k)],
                                    orthonormal_.bottomRightCorner(m - k, rank - k));
  }
}

template <typename Scalar>
double SpanProjector<Scalar>::distance(const Vector<Scalar>& v) const {
  if (v.size() != dimension_) {
    throw std::invalid_argument("SpanProjector::distance: dimension mismatch");
  }
  if (orthonormal_.cols() == 0) return v.norm();
  Vector<Scalar> residual = v - orthonormal_ * (orthonormal_.adjoint() * v);
  residual -= orthonormal_ * (orthonormal_.adjoint() * residual);
  return std::min(residual.norm(), v.norm());
}

template class SpanProjector<double>;
template class SpanProjector<Complex>;

double power_iteration_top(const Eigen::MatrixXd& a, double tol, int max_iter) {
  require_finite(a, "power_iteration_top");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("power_iteration_top: matrix must be square");
  }
  const Index n = a.rows();
  // Fixed start with irrational-ratio entries so it is not orthogonal to
  // a dominant eigenvector with small integer structure.
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = 1.0 + std::fmod(static_cast<double>(i + 1) * std::numbers::phi, 1.0);
  }
  x.normalize();
  double previous = x.dot(a * x);
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd y = a * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    const double step = (y - x).norm();
    x = std::move(y);
    const double rayleigh = x.dot(a * x);
    // The Rayleigh quotient converges quadratically faster than the vector,
    // so the vector only has to settle to sqrt(tol).
    if (std::abs(rayleigh - previous) <= tol * std::max(1.0, std::abs(rayleigh)) &&
        step <= std::sqrt(tol)) {
      return rayleigh;
    }
    previous = rayleigh;
  }
  throw ConvergenceError("power_iteration_top: no convergence after " +
                         std::to_string(max_iter) + " iterations");
}

double canonical_phase(const Complex& z) {
  const double im = z.imag() == 0.0 ? 0.0 : z.imag();
  const double re = z.real() == 0.0 ? 0.0 : z.real();
  if (im == 0.0 && re < 0.0) return std::numbers::pi;
  return std::atan2(im, re);
}

void sort_by_modulus_then_phase(Eigen::VectorXcd& values) {
  std::vector<Complex> sorted(values.data(), values.data() + values.size());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return canonical_phase(a) < canonical_phase(b);
  });
  for (Index i = 0; i < values.size(); ++i) {
    values(i) = sorted[static_cast<std::size_t>(i)];
  }
}

}  // namespace rmarkov
