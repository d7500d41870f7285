#pragma once

#include "rmarkov/linalg.hpp"
#include "rmarkov/random.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

namespace rmarkov::testing {

inline Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, SeededStream& stream) {
  Eigen::MatrixXd a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = stream.next_gaussian();
  return a;
}

inline Eigen::MatrixXcd complex_gaussian_matrix(Index rows, Index cols, SeededStream& stream) {
  Eigen::MatrixXcd a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = Complex(stream.next_gaussian(), stream.next_gaussian());
  return a;
}

/// Singular values from Eigen's Jacobi SVD, used only as an independent oracle.
template <typename MatrixType>
Eigen::VectorXd reference_singular_values(const MatrixType& a) {
  Eigen::JacobiSVD<MatrixType> svd(a);
  return svd.singularValues();
}

/// Eigenvalues from Eigen's real/complex eigen solvers, oracle only.
inline std::vector<Complex> reference_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  const Eigen::VectorXcd v = solver.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

inline std::vector<Complex> reference_eigenvalues(const Eigen::MatrixXcd& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
  const Eigen::VectorXcd v = solver.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

/// Greedy matching distance between two eigenvalue multisets.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const Complex& x : a) {
    auto best = std::min_element(b.begin(), b.end(), [&](const Complex& p, const Complex& q) {
      return std::abs(p - x) < std::abs(q - x);
    });
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

inline std::vector<Complex> to_vector(const Eigen::VectorXcd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace rmarkov::testing
