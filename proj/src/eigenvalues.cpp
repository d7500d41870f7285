#include "householder.hpp"
#include "rmarkov/linalg.hpp"

#include <cmath>
#include <limits>

namespace rmarkov::detail {
namespace {

constexpr double kUnitRoundoff = 0x1p-52;
constexpr int kSweepsPerEigenvalue = 40;
constexpr int kExceptionalShiftPeriod = 10;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Diagonal similarity scaling by powers of two until row and column norms
// are comparable. Exact in floating point, so eigenvalues are unchanged.
template <typename MatrixType>
void balance(MatrixType& a) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  const Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

bool negligible_subdiagonal(double sub, double diag_above, double diag_below, double fallback) {
  double s = std::abs(diag_above) + std::abs(diag_below);
  if (s == 0.0) s = fallback;
  return std::abs(sub) <= kUnitRoundoff * s;
}

// Francis implicit double-shift QR on a real upper Hessenberg matrix
// (values only). Works on the active window [low, last] and deflates 1x1
// and 2x2 blocks from the bottom.
Eigen::VectorXcd francis_qr(RowMajorMatrix& a) {
  const Index n = a.rows();
  Eigen::VectorXcd result(n);

  double anorm = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }
  if (anorm == 0.0) anorm = 1.0;

  Index last = n - 1;
  double shift_total = 0.0;
  while (last >= 0) {
    int its = 0;
    Index low = 0;
    do {
      for (low = last; low >= 1; --low) {
        if (negligible_subdiagonal(a(low, low - 1), a(low - 1, low - 1), a(low, low), anorm)) {
          a(low, low - 1) = 0.0;
          break;
        }
      }
      double x = a(last, last);
      if (low == last) {
        result(last) = Complex(x + shift_total, 0.0);
        --last;
        continue;
      }
      double y = a(last - 1, last - 1);
      double w = a(last, last - 1) * a(last - 1, last);
      if (low == last - 1) {
        const double p = 0.5 * (y - x);
        const double q = p * p + w;
        double z = std::sqrt(std::abs(q));
        x += shift_total;
        if (q >= 0.0) {
          z = p + std::copysign(z, p);
          const double first = x + z;
          const double second = z != 0.0 ? x - w / z : first;
          result(last - 1) = Complex(first, 0.0);
          result(last) = Complex(second, 0.0);
        } else {
          result(last - 1) = Complex(x + p, z);
          result(last) = Complex(x + p, -z);
        }
        last -= 2;
        continue;
      }

      if (its == kSweepsPerEigenvalue) {
        throw ConvergenceError("eigenvalues: no deflation within " +
                               std::to_string(kSweepsPerEigenvalue) + " sweeps at index " +
                               std::to_string(last));
      }
      if (its > 0 && its % kExceptionalShiftPeriod == 0) {
        // The accumulated shift is added back to every later eigenvalue, so
        // the whole leading diagonal moves, not just the active window.
        shift_total += x;
        for (Index i = 0; i <= last; ++i) a(i, i) -= x;
        const double s = std::abs(a(last, last - 1)) + std::abs(a(last - 1, last - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      ++its;

      // Find two consecutive small subdiagonals to start the bulge.
      Index m = last - 2;
      double p = 0.0;
      double q = 0.0;
      double r = 0.0;
      double z = 0.0;
      for (; m >= low; --m) {
        z = a(m, m);
        r = x - z;
        const double s = y - z;
        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
        q = a(m + 1, m + 1) - z - r - s;
        r = a(m + 2, m + 1);
        const double scale = std::abs(p) + std::abs(q) + std::abs(r);
        p /= scale;
        q /= scale;
        r /= scale;
        if (m == low) break;
        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
        const double v =
            std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
        if (u <= kUnitRoundoff * v) break;
      }
      for (Index i = m; i < last - 1; ++i) {
        a(i + 2, i) = 0.0;
        if (i != m) a(i + 2, i - 1) = 0.0;
      }

      // Chase the bulge with 3x3 reflectors.
      for (Index k = m; k < last; ++k) {
        if (k != m) {
          p = a(k, k - 1);
          q = a(k + 1, k - 1);
          r = k + 1 != last ? a(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x != 0.0) {
            p /= x;
            q /= x;
            r /= x;
          }
        }
        const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
        if (s == 0.0) continue;
        if (k == m) {
          if (low != m) a(k, k - 1) = -a(k, k - 1);
        } else {
          a(k, k - 1) = -s * x;
        }
        p += s;
        x = p / s;
        y = q / s;
        z = r / s;
        q /= p;
        r /= p;
        for (Index j = k; j <= last; ++j) {
          p = a(k, j) + q * a(k + 1, j);
          if (k + 1 != last) {
            p += r * a(k + 2, j);
            a(k + 2, j) -= p * z;
          }
          a(k + 1, j) -= p * y;
          a(k, j) -= p * x;
        }
        const Index row_end = std::min(last, k + 3);
        for (Index i = low; i <= row_end; ++i) {
          p = x * a(i, k) + y * a(i, k + 1);
          if (k + 1 != last) {
            p += z * a(i, k + 2);
            a(i, k + 2) -= p * r;
          }
          a(i, k + 1) -= p * q;
          a(i, k) -= p;
        }
      }
    } while (last >= 0 && low < last - 1);
  }
  return result;
}

// Wilkinson shift: eigenvalue of the trailing 2x2 block closer to its
// bottom-right entry.
Complex wilkinson_shift(const Complex& a, const Complex& b, const Complex& c, const Complex& d) {
  const Complex half_diff = 0.5 * (a - d);
  const Complex disc = std::sqrt(half_diff * half_diff + b * c);
  const Complex plus = half_diff + disc;
  const Complex minus = half_diff - disc;
  const Complex denom = std::abs(plus) >= std::abs(minus) ? plus : minus;
  if (std::abs(denom) == 0.0) return d;
  return d - b * c / denom;
}

// Single-shift QR with Givens rotations on a complex upper Hessenberg matrix.
Eigen::VectorXcd complex_qr(Eigen::MatrixXcd& h) {
  const Index n = h.rows();
  Eigen::VectorXcd result(n);
  double anorm = h.cwiseAbs().sum();
  if (anorm == 0.0) anorm = 1.0;

  std::vector<double> cs(static_cast<std::size_t>(n));
  std::vector<Complex> sn(static_cast<std::size_t>(n));

  Index last = n - 1;
  int its = 0;
  while (last >= 0) {
    Index low = last;
    while (low >= 1) {
      const double s = std::abs(h(low - 1, low - 1)) + std::abs(h(low, low));
      const double ref = s == 0.0 ? anorm : s;
      if (std::abs(h(low, low - 1)) <= kUnitRoundoff * ref) {
        h(low, low - 1) = 0.0;
        break;
      }
      --low;
    }
    if (low == last) {
      result(last) = h(last, last);
      --last;
      its = 0;
      continue;
    }
    if (its == kSweepsPerEigenvalue) {
      throw ConvergenceError("eigenvalues: no deflation within " +
                             std::to_string(kSweepsPerEigenvalue) + " sweeps at index " +
                             std::to_string(last));
    }
    ++its;
    Complex mu;
    if (its % kExceptionalShiftPeriod == 0) {
      mu = h(last, last) + 0.75 * std::abs(h(last, last - 1).real()) +
           Complex(0.0, 0.75 * std::abs(h(last, last - 1).imag()));
    } else {
      mu = wilkinson_shift(h(last - 1, last - 1), h(last - 1, last), h(last, last - 1),
                           h(last, last));
    }

    for (Index i = low; i <= last; ++i) h(i, i) -= mu;
    for (Index k = low; k < last; ++k) {
      const Complex a = h(k, k);
      const Complex b = h(k + 1, k);
      const double r = std::hypot(std::abs(a), std::abs(b));
      double c = 1.0;
      Complex s = 0.0;
      if (r != 0.0) {
        if (std::abs(a) == 0.0) {
          c = 0.0;
          s = std::conj(b) / std::abs(b);
        } else {
          c = std::abs(a) / r;
          s = (a / std::abs(a)) * std::conj(b) / r;
        }
      }
      cs[static_cast<std::size_t>(k)] = c;
      sn[static_cast<std::size_t>(k)] = s;
      for (Index j = k; j <= last; ++j) {
        const Complex top = h(k, j);
        const Complex bottom = h(k + 1, j);
        h(k, j) = c * top + s * bottom;
        h(k + 1, j) = -std::conj(s) * top + c * bottom;
      }
      h(k + 1, k) = 0.0;
    }
    for (Index k = low; k < last; ++k) {
      const double c = cs[static_cast<std::size_t>(k)];
      const Complex s = sn[static_cast<std::size_t>(k)];
      const Index row_end = std::min(last, k + 1);
      for (Index i = low; i <= row_end; ++i) {
        const Complex left = h(i, k);
        const Complex right = h(i, k + 1);
        h(i, k) = c * left + std::conj(s) * right;
        h(i, k + 1) = -s * left + c * right;
      }
    }
    for (Index i = low; i <= last; ++i) h(i, i) += mu;
  }
  return result;
}

}  // namespace

Eigen::VectorXcd eigenvalues_real(const Eigen::MatrixXd& a) {
  require_finite(a, "eigenvalues");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenvalues: matrix must be square");
  }
  Eigen::MatrixXd balanced = a;
  balance(balanced);
  RowMajorMatrix h = hessenberg_reduce<double>(balanced);
  Eigen::VectorXcd values = francis_qr(h);
  sort_by_modulus_then_phase(values);
  return values;
}

Eigen::VectorXcd eigenvalues_complex(const Eigen::MatrixXcd& a) {
  require_finite(a, "eigenvalues");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenvalues: matrix must be square");
  }
  Eigen::MatrixXcd balanced = a;
  balance(balanced);
  Eigen::MatrixXcd h = hessenberg_reduce<Complex>(balanced);
  Eigen::VectorXcd values = complex_qr(h);
  sort_by_modulus_then_phase(values);
  return values;
}

}  // namespace rmarkov::detail
