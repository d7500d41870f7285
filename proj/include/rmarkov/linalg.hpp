#pragma once

// Dense spectral kernels: Householder QR, Hessenberg reduction, Francis
// double-shift QR eigenvalues, Golub-Kahan singular values, and subspace
// distances. Storage comes from Eigen; the factorizations are written here.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace rmarkov {

using Complex = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when an iterative kernel exhausts its sweep budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct is_supported_scalar
    : std::bool_constant<std::is_same_v<Scalar, double> ||
                         std::is_same_v<Scalar, Complex>> {};

/// Throws std::invalid_argument when any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what = "matrix") {
  if (a.size() == 0) {
    throw std::invalid_argument(std::string(what) + ": empty");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

template <typename Scalar>
struct QrFactors {
  Matrix<Scalar> q;  // rows x cols, orthonormal columns
  Matrix<Scalar> r;  // cols x cols, upper triangular
};

/// Eigenvalues and singular values of one matrix.
///
/// Eigenvalues are ordered by modulus, largest first, with ties broken by
/// ascending phase in (-pi, pi]. Singular values are descending.
struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::VectorXd singular_values;
};

namespace detail {

template <typename Scalar>
QrFactors<Scalar> householder_qr(const Matrix<Scalar>& a);

template <typename Scalar>
Matrix<Scalar> hessenberg_reduce(const Matrix<Scalar>& a);

Eigen::VectorXcd eigenvalues_real(const Eigen::MatrixXd& a);
Eigen::VectorXcd eigenvalues_complex(const Eigen::MatrixXcd& a);

template <typename Scalar>
Eigen::VectorXd singular_values(const Matrix<Scalar>& a);

template <typename Scalar>
double abs_determinant(const Matrix<Scalar>& a);

}  // namespace detail

/// Thin Householder QR of a matrix with rows >= cols.
template <typename Derived>
auto householder_qr(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  static_assert(is_supported_scalar<Scalar>::value);
  return detail::householder_qr<Scalar>(a.eval());
}

/// Orthogonal (unitary) similarity to upper Hessenberg form.
template <typename Derived>
auto hessenberg_reduce(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  static_assert(is_supported_scalar<Scalar>::value);
  return detail::hessenberg_reduce<Scalar>(a.eval());
}

/// All eigenvalues of a square matrix, sorted by modulus then phase.
///
/// Real input goes through balancing, Hessenberg reduction and Francis
/// implicit double-shift QR, so non-real eigenvalues come out as exact
/// conjugate pairs. Complex input uses single-shift QR with a Wilkinson shift.
/// Throws ConvergenceError if an eigenvalue fails to deflate within 40 sweeps.
template <typename Derived>
Eigen::VectorXcd eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  static_assert(is_supported_scalar<Scalar>::value);
  if constexpr (std::is_same_v<Scalar, double>) {
    return detail::eigenvalues_real(a.eval());
  } else {
    return detail::eigenvalues_complex(a.eval());
  }
}

/// min(rows, cols) singular values, descending. Values below
/// 1e-12 * ||a||_F are reported as exactly zero.
template <typename Derived>
Eigen::VectorXd singular_values(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  static_assert(is_supported_scalar<Scalar>::value);
  return detail::singular_values<Scalar>(a.eval());
}

template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  return singular_values(a)(0);
}

template <typename Derived>
double smallest_singular_value(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("smallest_singular_value: matrix must be square");
  }
  const Eigen::VectorXd s = singular_values(a);
  return s(s.size() - 1);
}

/// |det(a)| as the product of the diagonal of the Householder R factor.
template <typename Derived>
double abs_determinant(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  static_assert(is_supported_scalar<Scalar>::value);
  return detail::abs_determinant<Scalar>(a.eval());
}

template <typename Derived>
Spectrum spectrum(const Eigen::MatrixBase<Derived>& a) {
  const auto evaluated = a.eval();
  return Spectrum{eigenvalues(evaluated), singular_values(evaluated)};
}

/// Orthogonal projector onto the span of a set of column vectors.
///
/// The basis may be rank deficient or empty; columns whose pivoted Householder
/// norm drops below 1e-12 times the largest column norm are treated as
/// dependent.
template <typename Scalar>
class SpanProjector {
 public:
  SpanProjector(Index dimension, const Matrix<Scalar>& basis);

  Index dimension() const { return dimension_; }
  Index rank() const { return orthonormal_.cols(); }
  const Matrix<Scalar>& orthonormal_basis() const { return orthonormal_; }

  /// Euclidean distance from v to the span.
  double distance(const Vector<Scalar>& v) const;

 private:
  Index dimension_;
  Matrix<Scalar> orthonormal_;
};

/// Distance from v to span(basis columns); an empty basis gives ||v||.
template <typename Scalar>
double distance_to_span(const Vector<Scalar>& v, const Matrix<Scalar>& basis) {
  return SpanProjector<Scalar>(v.size(), basis).distance(v);
}

/// Largest eigenvalue of a symmetric nonnegative-definite matrix by power
/// iteration from a fixed pseudo-random start. Throws ConvergenceError when
/// successive Rayleigh quotients have not settled within tol after max_iter.
double power_iteration_top(const Eigen::MatrixXd& a, double tol, int max_iter);

/// Sorts by modulus descending, then phase ascending in (-pi, pi]. Stable.
void sort_by_modulus_then_phase(Eigen::VectorXcd& values);

/// Phase in (-pi, pi], with -0.0 imaginary parts treated as +0.0.
double canonical_phase(const Complex& z);

}  // namespace rmarkov
