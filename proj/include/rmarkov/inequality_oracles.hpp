#pragma once

// Executable checks of deterministic singular value and eigenvalue
// inequalities. Each check returns a margin-carrying report instead of a bool.

#include "rmarkov/ensembles.hpp"
#include "rmarkov/linalg.hpp"
#include "rmarkov/random.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rmarkov {

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of one check or of a merged campaign of checks.
///
/// passed == (worst_margin >= -tolerance). Margins are normalized by the
/// natural scale of each inequality, so one tolerance serves a whole lemma.
struct CheckReport {
  std::string lemma_id;
  bool passed = true;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::string witness;
  /// Set when the instance sits on a singular or otherwise degenerate case.
  bool degenerate = false;
  long instances = 1;

  /// Keeps the smaller margin and its witness; associative and commutative up
  /// to witness ties, which are broken by the smaller witness string.
  CheckReport& merge(const CheckReport& other);

  /// One line: "<id> PASS|FAIL instances=... worst_margin=... tolerance=... witness=...".
  std::string summary_line() const;
};

CheckReport merged(CheckReport a, const CheckReport& b);

/// s1(AB) <= s1(A)s1(B); |s_i(A) - s_i(B)| <= s1(A - B); s_n(AB) >= s_n(A)s_n(B);
/// and the diagonal sandwich s_n(D)s_i(B) <= s_i(DB) <= s1(D)s_i(B) with D the
/// diagonal part of a (a itself when a is diagonal).
CheckReport check_basic_inequalities(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// n^{-1/2} min_i dist(R_i, R_{-i}) <= s_n(A) <= min_i dist(R_i, R_{-i}).
CheckReport check_rv_row_bound(const Eigen::MatrixXd& a);

/// sum s_i^{-2} = sum dist(R_i, R_{-i})^{-2} for a full-rank n' x n matrix,
/// n' <= n. Throws RankDeficientError when s_{n'} < 1e-12 ||A||_F.
CheckReport check_tao_vu_negative_moment(const Eigen::MatrixXd& a);

/// s_i(A) >= s_i(B) >= s_{i+n-n'}(A) where B drops `deleted_rows` of A.
CheckReport check_cauchy_interlacing(const Eigen::MatrixXd& a,
                                     const std::vector<Index>& deleted_rows);

/// s_{i-k}(A) >= s_i(B) >= s_{i+k}(A) with k the numerical rank of A - B, in
/// both directions, plus sup_t |F_A(t) - F_B(t)| <= k / n for the singular
/// value CDFs.
CheckReport check_thompson_lidskii(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Multiplicative and additive majorization of eigenvalue moduli by singular
/// values, product equality at k = n, and sum |lambda|^2 <= sum s^2.
CheckReport check_weyl(const Eigen::MatrixXd& a);

/// A_w = I - w * ones * e1^T.
Eigen::MatrixXcd special_matrix(Index n, const Complex& w);

/// 2 x 2 block carrying the two nontrivial singular values of A_w; the rest
/// are exactly 1.
Eigen::Matrix2cd special_matrix_core(Index n, const Complex& w);

/// Roots u_+ >= u_- of X^2 - (1 + (n-1)|w|^2 + |1-w|^2) X + |1-w|^2.
struct QuadraticRoots {
  double larger;
  double smaller;
};
QuadraticRoots special_matrix_roots(Index n, const Complex& w);

/// Large-n limit of s_n(A_{z / sqrt(n)}).
double special_matrix_limit(const Complex& z);

/// Dense SVD for n <= kSpecialMatrixDenseLimit; above it the 2 x 2 core is
/// used, since the remaining n - 2 singular values are exactly 1. The large-n
/// limit is checked (within 2 n^{-1/2}) for n >= 10^4.
inline constexpr Index kSpecialMatrixDenseLimit = 1000;
CheckReport check_special_matrix_A(Index n, const Complex& z);

/// Monte Carlo frequency of dist(R, H) <= (sigma / 2) sqrt(n - dim H) for rows
/// R with i.i.d. entries from `law` and one fixed subspace H spanned by
/// Gaussian vectors. dim_h may be anything in [0, n - 1]; the witness notes
/// whether dim_h <= n - n^0.99 holds.
CheckReport check_distance_concentration(Index n, const EntryLaw& law, Index dim_h, long replicas,
                                         SeededStream stream);

enum class Lemma { basic, rvdist, tvneg, cauchy, thompson, weyl, special_a, concdist };

std::string_view lemma_name(Lemma lemma);
std::optional<Lemma> parse_lemma(std::string_view name);
/// The seven lemmas with a deterministic per-instance check.
const std::vector<Lemma>& fuzzable_lemmas();

/// Runs `instances_per_size` seeded random instances for each size in
/// [min_size, max_size] and merges the reports. concdist runs one Monte
/// Carlo campaign per size instead.
CheckReport fuzz_lemma(Lemma lemma, long instances_per_size, std::uint64_t seed,
                       Index min_size = 3, Index max_size = 12);

}  // namespace rmarkov
