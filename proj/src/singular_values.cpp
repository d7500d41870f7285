#include "householder.hpp"
#include "rmarkov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rmarkov::detail {
namespace {

constexpr double kUnitRoundoff = 0x1p-52;
constexpr int kSweepsPerValue = 40;
constexpr double kZeroThreshold = 1e-12;

struct Bidiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd superdiagonal;
};

// Householder bidiagonalization of a tall matrix (rows >= cols). Both
// reflector families produce real betas, so the bidiagonal is real even for
// complex input.
template <typename Scalar>
Bidiagonal bidiagonalize(Matrix<Scalar> a) {
  const Index m = a.rows();
  const Index n = a.cols();
  Bidiagonal b;
  b.diagonal.setZero(n);
  b.superdiagonal.setZero(std::max<Index>(n - 1, 0));
  for (Index k = 0; k < n; ++k) {
    const auto left = make_reflector<Scalar>(a.col(k).tail(m - k));
    b.diagonal(k) = left.beta;
    if (k + 1 >= n) break;
    apply_left(left, a.bottomRightCorner(m - k, n - k - 1));

    // Row reflector from the conjugated row so that row * H = beta e1^T.
    const Vector<Scalar> row = a.row(k).tail(n - k - 1).adjoint();
    const auto right = make_reflector<Scalar>(row);
    b.superdiagonal(k) = right.beta;
    apply_right(right, a.bottomRightCorner(m - k - 1, n - k - 1));
  }
  return b;
}

// Shift from the trailing 2x2 block of B^T B restricted to [low, high].
double trailing_shift(const Eigen::VectorXd& d, const Eigen::VectorXd& e, Index low, Index high) {
  const double dm = d(high - 1);
  const double dn = d(high);
  const double em = e(high - 1);
  const double emm = high - 1 > low ? e(high - 2) : 0.0;
  const double t11 = dm * dm + emm * emm;
  const double t22 = dn * dn + em * em;
  const double t12 = dm * em;
  const double delta = 0.5 * (t11 - t22);
  const double root = std::hypot(delta, t12);
  const double denom = delta >= 0.0 ? delta + root : delta - root;
  if (denom == 0.0) return t22;
  return t22 - t12 * t12 / denom;
}

void golub_kahan_step(Eigen::VectorXd& d, Eigen::VectorXd& e, Index low, Index high) {
  const double mu = trailing_shift(d, e, low, high);
  double y = d(low) * d(low) - mu;
  double z = d(low) * e(low);
  for (Index k = low; k < high; ++k) {
    // Right rotation on columns k, k+1.
    double r = std::hypot(y, z);
    double c = r == 0.0 ? 1.0 : y / r;
    double s = r == 0.0 ? 0.0 : z / r;
    if (k > low) e(k - 1) = r;
    y = c * d(k) + s * e(k);
    e(k) = -s * d(k) + c * e(k);
    z = s * d(k + 1);
    d(k + 1) = c * d(k + 1);

    // Left rotation on rows k, k+1 removes the bulge below the diagonal.
    r = std::hypot(y, z);
    c = r == 0.0 ? 1.0 : y / r;
    s = r == 0.0 ? 0.0 : z / r;
    d(k) = r;
    y = c * e(k) + s * d(k + 1);
    d(k + 1) = -s * e(k) + c * d(k + 1);
    if (k + 1 < high) {
      z = s * e(k + 1);
      e(k + 1) = c * e(k + 1);
    }
  }
  e(high - 1) = y;
}

// d(k) == 0 with k < high: rotate row k against the rows below until the
// coupling e(k) has been pushed off the end of the block.
void chase_zero_diagonal(Eigen::VectorXd& d, Eigen::VectorXd& e, Index k, Index high) {
  double x = e(k);
  e(k) = 0.0;
  for (Index j = k + 1; j <= high; ++j) {
    const double r = std::hypot(x, d(j));
    const double c = d(j) / r;
    const double s = x / r;
    d(j) = r;
    if (j < high) {
      x = -s * e(j);
      e(j) = c * e(j);
    }
  }
}

// d(high) == 0: rotate column high against the columns to its left.
void chase_zero_last(Eigen::VectorXd& d, Eigen::VectorXd& e, Index low, Index high) {
  double x = e(high - 1);
  e(high - 1) = 0.0;
  for (Index j = high - 1; j >= low; --j) {
    const double r = std::hypot(x, d(j));
    const double c = d(j) / r;
    const double s = x / r;
    d(j) = r;
    if (j > low) {
      x = -s * e(j - 1);
      e(j - 1) = c * e(j - 1);
    }
  }
}

void bidiagonal_qr(Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const Index n = d.size();
  if (n <= 1) return;
  const double bnorm = d.cwiseAbs().maxCoeff() + e.cwiseAbs().maxCoeff();
  const double tiny = kUnitRoundoff * bnorm;
  long budget = static_cast<long>(kSweepsPerValue) * n;

  Index high = n - 1;
  while (high > 0) {
    for (Index i = 0; i < high; ++i) {
      if (std::abs(e(i)) <= kUnitRoundoff * (std::abs(d(i)) + std::abs(d(i + 1)))) e(i) = 0.0;
    }
    for (Index i = 0; i <= high; ++i) {
      if (std::abs(d(i)) <= tiny) d(i) = 0.0;
    }
    if (e(high - 1) == 0.0) {
      --high;
      continue;
    }
    Index low = high - 1;
    while (low > 0 && e(low - 1) != 0.0) --low;

    bool chased = false;
    for (Index k = low; k < high; ++k) {
      if (d(k) == 0.0) {
        chase_zero_diagonal(d, e, k, high);
        chased = true;
        break;
      }
    }
    if (!chased && d(high) == 0.0) {
      chase_zero_last(d, e, low, high);
      chased = true;
    }
    if (chased) continue;

    if (--budget < 0) {
      throw ConvergenceError("singular_values: implicit QR exceeded its sweep budget");
    }
    golub_kahan_step(d, e, low, high);
  }
}

}  // namespace

template <typename Scalar>
Eigen::VectorXd singular_values(const Matrix<Scalar>& a) {
  require_finite(a, "singular_values");
  const double frobenius = a.norm();
  const Index k = std::min(a.rows(), a.cols());
  if (frobenius == 0.0) return Eigen::VectorXd::Zero(k);

  // Singular values are invariant under (conjugate) transposition and scale
  // equivariant; work on a tall copy scaled to unit max-abs entry.
  const double scale = a.cwiseAbs().maxCoeff();
  Matrix<Scalar> tall;
  if (a.rows() >= a.cols()) {
    tall = a / scale;
  } else {
    tall = a.adjoint() / scale;
  }
  Bidiagonal b = bidiagonalize<Scalar>(std::move(tall));
  bidiagonal_qr(b.diagonal, b.superdiagonal);

  Eigen::VectorXd s = b.diagonal.cwiseAbs() * scale;
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  const double cutoff = kZeroThreshold * frobenius;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) < cutoff) s(i) = 0.0;
  }
  return s;
}

template Eigen::VectorXd singular_values<double>(const Matrix<double>&);
template Eigen::VectorXd singular_values<Complex>(const Matrix<Complex>&);

}  // namespace rmarkov::detail
