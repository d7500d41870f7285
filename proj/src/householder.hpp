#pragma once

// Elementary reflectors shared by the QR, Hessenberg and bidiagonal kernels.
// Convention: H = I - tau v v^H with v(0) = 1, and H^H x = beta e1 with beta
// real, so reductions built from these reflectors leave real diagonals.

#include "rmarkov/linalg.hpp"

#include <cmath>

namespace rmarkov::detail {

template <typename Scalar>
struct Reflector {
  Vector<Scalar> v;
  Scalar tau{0};
  double beta{0};
};

inline double real_part(double x) { return x; }
inline double real_part(const Complex& x) { return x.real(); }
inline double imag_part(double) { return 0.0; }
inline double imag_part(const Complex& x) { return x.imag(); }
inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& x) { return std::conj(x); }

template <typename Scalar, typename Derived>
Reflector<Scalar> make_reflector(const Eigen::MatrixBase<Derived>& x) {
  Reflector<Scalar> h;
  const Index n = x.size();
  h.v.setZero(n);
  h.v(0) = Scalar(1);
  const Scalar alpha = x(0);
  const double tail = n > 1 ? x.tail(n - 1).squaredNorm() : 0.0;
  if (tail == 0.0 && imag_part(alpha) == 0.0) {
    h.tau = Scalar(0);
    h.beta = real_part(alpha);
    return h;
  }
  const double norm = std::sqrt(std::norm(alpha) + tail);
  const double beta = real_part(alpha) >= 0.0 ? -norm : norm;
  h.tau = (Scalar(beta) - alpha) / beta;
  if (n > 1) {
    h.v.tail(n - 1) = x.tail(n - 1) / (alpha - Scalar(beta));
  }
  h.beta = beta;
  return h;
}

/// block <- H^H block
template <typename Scalar, typename Block>
void apply_left(const Reflector<Scalar>& h, Block&& block) {
  if (h.tau == Scalar(0)) return;
  const Vector<Scalar> w = block.adjoint() * h.v;
  block.noalias() -= (conj_of(h.tau) * h.v) * w.adjoint();
}

/// block <- block H
template <typename Scalar, typename Block>
void apply_right(const Reflector<Scalar>& h, Block&& block) {
  if (h.tau == Scalar(0)) return;
  const Vector<Scalar> w = block * h.v;
  block.noalias() -= (h.tau * w) * h.v.adjoint();
}

/// block <- H block
template <typename Scalar, typename Block>
void apply_left_unconjugated(const Reflector<Scalar>& h, Block&& block) {
  if (h.tau == Scalar(0)) return;
  const Vector<Scalar> w = block.adjoint() * h.v;
  block.noalias() -= (h.tau * h.v) * w.adjoint();
}

}  // namespace rmarkov::detail
