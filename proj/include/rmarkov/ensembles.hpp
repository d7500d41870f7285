#pragma once

// i.i.d. nonnegative entry laws and the row-normalized Markov matrix M = D X.

#include "rmarkov/linalg.hpp"
#include "rmarkov/random.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rmarkov {

enum class LawFamily { exponential, bernoulli, uniform, heavy_tail, shifted_uniform };

/// Distribution of one entry X_{1,1}. Supported on [0, inf).
///
/// Config strings: "exponential:rate=1", "bernoulli:p=0.5", "uniform",
/// "heavytail:beta=0.75", "shifteduniform:a=0.5,b=1.5".
class EntryLaw {
 public:
  static EntryLaw exponential(double rate = 1.0);
  static EntryLaw bernoulli(double p);
  static EntryLaw uniform();
  /// X = U^{-beta}, U uniform on (0, 1).
  static EntryLaw heavy_tail(double beta);
  static EntryLaw shifted_uniform(double a, double b);

  static EntryLaw parse(std::string_view text);

  LawFamily family() const { return family_; }
  double first_parameter() const { return p1_; }
  double second_parameter() const { return p2_; }

  /// E X; +inf for heavy_tail with beta >= 1.
  double mean() const;
  /// Var X; +inf for heavy_tail with beta >= 1/2.
  double variance() const;
  double stddev() const;
  /// sigma / m, the radius of the limiting disc for sqrt(n) M.
  double effective_radius() const;
  /// P(X = 0).
  double zero_probability() const;
  bool has_bounded_density() const;
  bool has_finite_variance() const;

  double sample(SeededStream& stream) const;

  std::string to_string() const;

  friend bool operator==(const EntryLaw&, const EntryLaw&) = default;

 private:
  EntryLaw(LawFamily family, double p1, double p2) : family_(family), p1_(p1), p2_(p2) {}

  LawFamily family_;
  double p1_;
  double p2_;
};

inline double sample_entry(const EntryLaw& law, SeededStream& stream) {
  return law.sample(stream);
}

/// n x n matrix of independent draws, filled row by row from the stream.
Eigen::MatrixXd sample_iid_matrix(Index n, const EntryLaw& law, SeededStream& stream);

struct MarkovSample {
  Eigen::MatrixXd x;
  Eigen::MatrixXd m_matrix;
  Eigen::VectorXd row_sums;
  std::vector<Index> fallback_rows;

  /// Diagonal of D: 1 / row_sum, or 1 on fallback rows.
  Eigen::VectorXd d_diagonal() const;
};

/// M_{ij} = X_{ij} / rho_i; rows with rho_i = 0 become the basis row e_i.
MarkovSample to_markov(const Eigen::MatrixXd& x);

/// Row-normalized exponential(1) matrix: each row is Dirichlet(1, ..., 1).
MarkovSample dirichlet_markov_sample(Index n, SeededStream& stream);

/// E X = m * ones(n, n).
Eigen::MatrixXd mean_matrix(Index n, const EntryLaw& law);

}  // namespace rmarkov
