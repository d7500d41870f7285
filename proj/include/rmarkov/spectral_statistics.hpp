#pragma once

// Empirical spectral measures and the reference laws they are compared to.

#include "rmarkov/linalg.hpp"

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace rmarkov {

enum class MeasureDomain { real_line, complex_plane };

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ReducibleChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform probability measure on a finite list of atoms (weight 1/n each).
///
/// atoms() keeps the order the atoms were given; real-line measures also
/// keep a sorted copy.
class EmpiricalMeasure {
 public:
  static EmpiricalMeasure on_real_line(const Eigen::VectorXd& atoms);
  static EmpiricalMeasure on_complex_plane(const Eigen::VectorXcd& atoms);

  MeasureDomain domain() const { return domain_; }
  bool is_real() const { return domain_ == MeasureDomain::real_line; }
  Index size() const { return static_cast<Index>(atoms_.size()); }
  double weight() const { return 1.0 / static_cast<double>(atoms_.size()); }

  /// Sorted ascending; throws DimensionMismatch on complex measures.
  const std::vector<double>& sorted_real_atoms() const;
  const std::vector<Complex>& atoms() const { return atoms_; }

  /// F(t) = mu((-inf, t]) for real-line measures.
  double cdf(double t) const;
  /// integral of |x|^k.
  double absolute_moment(int k) const;
  /// integral of z^k (complex moment; real for real-line measures).
  Complex moment(int k) const;

  /// Drops the `count` atoms of largest modulus (largest values on the
  /// real line, leading entries of a modulus-sorted complex list).
  EmpiricalMeasure without_top(Index count) const;
  /// Multiplies every atom by `factor`.
  EmpiricalMeasure scaled(double factor) const;

 private:
  EmpiricalMeasure(MeasureDomain domain, std::vector<Complex> atoms, std::vector<double> sorted);

  MeasureDomain domain_;
  std::vector<Complex> atoms_;
  std::vector<double> sorted_;
};

EmpiricalMeasure esd_eigen(const Spectrum& spectrum);
EmpiricalMeasure esd_singular(const Spectrum& spectrum);

enum class ReferenceKind { quartercircular, circular };

/// Quartercircular law on [0, 2 sigma] or uniform law on the disc |z| <= sigma.
struct ReferenceLaw {
  ReferenceKind kind;
  double sigma;

  static ReferenceLaw quartercircular(double sigma);
  static ReferenceLaw circular(double sigma);
};

double quartercircular_density(double t, double sigma);
double quartercircular_cdf(double t, double sigma);
double circular_radial_cdf(double r, double sigma);

/// Sup distance between the empirical CDF and the law's CDF, exact for step
/// functions. Real-line measures pair with the quartercircular law; complex
/// measures pair with the circular law through the radial CDF of |z|.
double kolmogorov_distance(const EmpiricalMeasure& mu, const ReferenceLaw& law);

/// U_mu(z) = -integral log|z - w| mu(dw). +inf when z is an atom.
double log_potential_empirical(const EmpiricalMeasure& mu, const Complex& z);

/// Closed-form logarithmic potential of the uniform law on the disc of
/// radius sigma.
double log_potential_circular(const Complex& z, double sigma);

/// |U_{mu_A}(z) + integral log t nu_{A - zI}(dt)|; +inf when z lies within
/// 1e-12 (relative) of an eigenvalue or A - zI is numerically singular.
double girko_identity_residual(const Eigen::MatrixXd& a, const Complex& z);

/// (1/n) trace(M^r) by repeated multiplication.
double loop_probability_moment(const Eigen::MatrixXd& m_matrix, int r);
/// (1/n) Re sum lambda_i^r, the eigenvalue route to the same number.
double eigenvalue_power_moment(const Eigen::VectorXcd& eigenvalues, int r);

bool is_irreducible(const Eigen::MatrixXd& m_matrix);

/// Stationary row vector kappa with ||kappa M - kappa||_1 <= tol.
/// Throws ReducibleChainError for reducible chains and ConvergenceError after
/// max_iter iterations.
Eigen::VectorXd invariant_measure(const Eigen::MatrixXd& m_matrix, double tol = 1e-12,
                                  int max_iter = 100000);

/// Total variation distance (1/2) ||p - q||_1.
double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// t >= 1: integral over [t, inf) of log s. t in (0, 1): integral over
/// [0, t] of -log s (may be +inf with an atom at 0).
double log_tail_integral(const EmpiricalMeasure& nu, double t);

/// Counts of atom phases in `bins` equal sectors of [0, 2 pi).
std::vector<long> phase_histogram(const EmpiricalMeasure& mu, int bins);
/// Pearson chi-square statistic of counts against the uniform distribution.
double chi_square_uniform(const std::vector<long>& counts);

/// Counts of real atoms in `bins` equal cells of [lo, hi); atoms outside are
/// ignored.
std::vector<long> value_histogram(const EmpiricalMeasure& mu, int bins, double lo, double hi);

/// Largest distance between a non-real atom and the conjugate of its best
/// partner; 0 for exactly conjugation-symmetric multisets.
double conjugate_symmetry_defect(const EmpiricalMeasure& mu);

/// CSV: "index,value" for real-line measures, "index,re,im" for complex ones.
void write_measure_csv(std::ostream& out, const EmpiricalMeasure& mu);

}  // namespace rmarkov
