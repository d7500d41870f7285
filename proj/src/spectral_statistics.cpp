#include "rmarkov/spectral_statistics.hpp"
#include "rmarkov/io.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

namespace rmarkov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square(const Eigen::MatrixXd& a, const char* what) {
  require_finite(a, what);
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

void require_markov(const Eigen::MatrixXd& m, const char* what) {
  require_square(m, what);
  if ((m.array() < 0.0).any()) throw std::invalid_argument(std::string(what) + ": negative entry");
  const Eigen::VectorXd sums = m.rowwise().sum();
  if ((sums.array() - 1.0).abs().maxCoeff() > 1e-10) {
    throw std::invalid_argument(std::string(what) + ": rows must sum to 1");
  }
}

std::vector<Index> indices_by_decreasing_modulus(const std::vector<Complex>& atoms) {
  std::vector<Index> order(atoms.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const Complex& x = atoms[static_cast<std::size_t>(a)];
    const Complex& y = atoms[static_cast<std::size_t>(b)];
    const double mx = std::abs(x);
    const double my = std::abs(y);
    if (mx != my) return mx > my;
    return canonical_phase(x) < canonical_phase(y);
  });
  return order;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(MeasureDomain domain, std::vector<Complex> atoms,
                                   std::vector<double> sorted)
    : domain_(domain), atoms_(std::move(atoms)), sorted_(std::move(sorted)) {
  if (atoms_.empty()) throw std::invalid_argument("EmpiricalMeasure: no atoms");
}

EmpiricalMeasure EmpiricalMeasure::on_real_line(const Eigen::VectorXd& values) {
  std::vector<Complex> atoms;
  atoms.reserve(static_cast<std::size_t>(values.size()));
  std::vector<double> sorted(values.data(), values.data() + values.size());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalMeasure: non-finite atom");
    atoms.emplace_back(v, 0.0);
  }
  std::sort(sorted.begin(), sorted.end());
  return {MeasureDomain::real_line, std::move(atoms), std::move(sorted)};
}

EmpiricalMeasure EmpiricalMeasure::on_complex_plane(const Eigen::VectorXcd& values) {
  std::vector<Complex> atoms(values.data(), values.data() + values.size());
  for (const Complex& v : atoms) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("EmpiricalMeasure: non-finite atom");
    }
  }
  return {MeasureDomain::complex_plane, std::move(atoms), {}};
}

const std::vector<double>& EmpiricalMeasure::sorted_real_atoms() const {
  if (!is_real()) throw DimensionMismatch("sorted_real_atoms: measure lives on the complex plane");
  return sorted_;
}

double EmpiricalMeasure::cdf(double t) const {
  const auto& sorted = sorted_real_atoms();
  const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  return static_cast<double>(count) * weight();
}

double EmpiricalMeasure::absolute_moment(int k) const {
  double sum = 0.0;
  for (const Complex& z : atoms_) sum += std::pow(std::abs(z), k);
  return sum * weight();
}

Complex EmpiricalMeasure::moment(int k) const {
  Complex sum = 0.0;
  for (const Complex& z : atoms_) {
    Complex power = 1.0;
    for (int i = 0; i < k; ++i) power *= z;
    sum += power;
  }
  return sum * weight();
}

EmpiricalMeasure EmpiricalMeasure::without_top(Index count) const {
  if (count < 0 || count >= size()) {
    throw std::invalid_argument("without_top: must keep at least one atom");
  }
  const auto order = indices_by_decreasing_modulus(atoms_);
  std::vector<bool> drop(atoms_.size(), false);
  if (is_real()) {
    // Largest values, not largest moduli, on the real line.
    std::vector<Index> by_value(atoms_.size());
    std::iota(by_value.begin(), by_value.end(), Index{0});
    std::stable_sort(by_value.begin(), by_value.end(), [&](Index a, Index b) {
      return atoms_[static_cast<std::size_t>(a)].real() > atoms_[static_cast<std::size_t>(b)].real();
    });
    for (Index i = 0; i < count; ++i) drop[static_cast<std::size_t>(by_value[static_cast<std::size_t>(i)])] = true;
  } else {
    for (Index i = 0; i < count; ++i) drop[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  }
  std::vector<Complex> kept;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!drop[i]) kept.push_back(atoms_[i]);
  }
  std::vector<double> sorted;
  if (is_real()) {
    for (const Complex& z : kept) sorted.push_back(z.real());
    std::sort(sorted.begin(), sorted.end());
  }
  return {domain_, std::move(kept), std::move(sorted)};
}

EmpiricalMeasure EmpiricalMeasure::scaled(double factor) const {
  std::vector<Complex> atoms = atoms_;
  for (Complex& z : atoms) z *= factor;
  std::vector<double> sorted;
  if (is_real()) {
    for (const Complex& z : atoms) sorted.push_back(z.real());
    std::sort(sorted.begin(), sorted.end());
  }
  return {domain_, std::move(atoms), std::move(sorted)};
}

EmpiricalMeasure esd_eigen(const Spectrum& spectrum) {
  return EmpiricalMeasure::on_complex_plane(spectrum.eigenvalues);
}

EmpiricalMeasure esd_singular(const Spectrum& spectrum) {
  return EmpiricalMeasure::on_real_line(spectrum.singular_values);
}

ReferenceLaw ReferenceLaw::quartercircular(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("quartercircular law needs sigma > 0");
  return {ReferenceKind::quartercircular, sigma};
}

ReferenceLaw ReferenceLaw::circular(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("circular law needs sigma > 0");
  return {ReferenceKind::circular, sigma};
}

double quartercircular_density(double t, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("quartercircular_density: sigma must be > 0");
  if (t < 0.0 || t > 2.0 * sigma) return 0.0;
  return std::sqrt(4.0 * sigma * sigma - t * t) / (std::numbers::pi * sigma * sigma);
}

double quartercircular_cdf(double t, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("quartercircular_cdf: sigma must be > 0");
  if (t <= 0.0) return 0.0;
  if (t >= 2.0 * sigma) return 1.0;
  const double s2 = sigma * sigma;
  const double value =
      (0.5 * t * std::sqrt(4.0 * s2 - t * t) + 2.0 * s2 * std::asin(t / (2.0 * sigma))) /
      (std::numbers::pi * s2);
  return std::clamp(value, 0.0, 1.0);
}

double circular_radial_cdf(double r, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("circular_radial_cdf: sigma must be > 0");
  if (r <= 0.0) return 0.0;
  return std::min(r * r / (sigma * sigma), 1.0);
}

double kolmogorov_distance(const EmpiricalMeasure& mu, const ReferenceLaw& law) {
  std::vector<double> values;
  if (mu.is_real() && law.kind == ReferenceKind::quartercircular) {
    values = mu.sorted_real_atoms();
  } else if (!mu.is_real() && law.kind == ReferenceKind::circular) {
    for (const Complex& z : mu.atoms()) values.push_back(std::abs(z));
    std::sort(values.begin(), values.end());
  } else {
    throw DimensionMismatch(
        "kolmogorov_distance: real measures pair with the quartercircular law, complex "
        "measures with the circular law");
  }
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = law.kind == ReferenceKind::quartercircular
                         ? quartercircular_cdf(values[i], law.sigma)
                         : circular_radial_cdf(values[i], law.sigma);
    worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return worst;
}

double log_potential_empirical(const EmpiricalMeasure& mu, const Complex& z) {
  double sum = 0.0;
  for (const Complex& w : mu.atoms()) {
    const double d = std::abs(z - w);
    if (d == 0.0) return kInf;
    sum += std::log(d);
  }
  return -sum * mu.weight();
}

double log_potential_circular(const Complex& z, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("log_potential_circular: sigma must be > 0");
  const double r = std::abs(z) / sigma;
  const double unit = r > 1.0 ? -std::log(r) : 0.5 * (1.0 - r * r);
  return unit - std::log(sigma);
}

double girko_identity_residual(const Eigen::MatrixXd& a, const Complex& z) {
  require_square(a, "girko_identity_residual");
  const Index n = a.rows();
  const Eigen::VectorXcd lambda = eigenvalues(a);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(lambda(i) - z) <= 1e-12 * (1.0 + std::abs(z))) return kInf;
  }
  const double potential = log_potential_empirical(EmpiricalMeasure::on_complex_plane(lambda), z);

  Eigen::VectorXd s;
  if (z.imag() == 0.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() -= z.real();
    s = singular_values(shifted);
  } else {
    Eigen::MatrixXcd shifted = a.cast<Complex>();
    shifted.diagonal().array() -= z;
    s = singular_values(shifted);
  }
  if (s.minCoeff() == 0.0) return kInf;
  const double log_integral = s.array().log().sum() / static_cast<double>(n);
  return std::abs(potential + log_integral);
}

double loop_probability_moment(const Eigen::MatrixXd& m_matrix, int r) {
  require_markov(m_matrix, "loop_probability_moment");
  if (r < 0) throw std::invalid_argument("loop_probability_moment: r must be >= 0");
  const double n = static_cast<double>(m_matrix.rows());
  if (r == 0) return 1.0;
  Eigen::MatrixXd power = m_matrix;
  for (int k = 1; k < r; ++k) power = power * m_matrix;
  return power.trace() / n;
}

double eigenvalue_power_moment(const Eigen::VectorXcd& eigenvalues, int r) {
  if (r < 0) throw std::invalid_argument("eigenvalue_power_moment: r must be >= 0");
  Complex sum = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    Complex power = 1.0;
    for (int k = 0; k < r; ++k) power *= eigenvalues(i);
    sum += power;
  }
  return sum.real() / static_cast<double>(eigenvalues.size());
}

bool is_irreducible(const Eigen::MatrixXd& m_matrix) {
  require_square(m_matrix, "is_irreducible");
  const Index n = m_matrix.rows();
  auto reaches_all = [&](bool transpose) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::deque<Index> queue{0};
    seen[0] = true;
    Index visited = 1;
    while (!queue.empty()) {
      const Index i = queue.front();
      queue.pop_front();
      for (Index j = 0; j < n; ++j) {
        const double w = transpose ? m_matrix(j, i) : m_matrix(i, j);
        if (w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          ++visited;
          queue.push_back(j);
        }
      }
    }
    return visited == n;
  };
  return reaches_all(false) && reaches_all(true);
}

Eigen::VectorXd invariant_measure(const Eigen::MatrixXd& m_matrix, double tol, int max_iter) {
  require_markov(m_matrix, "invariant_measure");
  if (!is_irreducible(m_matrix)) {
    throw ReducibleChainError("invariant_measure: chain is reducible");
  }
  const Index n = m_matrix.rows();
  Eigen::RowVectorXd kappa = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter <= max_iter; ++iter) {
    const Eigen::RowVectorXd moved = kappa * m_matrix;
    if ((moved - kappa).lpNorm<1>() <= tol) return kappa.transpose();
    // Lazy step (I + M) / 2: same stationary law, aperiodic even when M is not.
    kappa = 0.5 * (kappa + moved);
    kappa /= kappa.sum();
  }
  throw ConvergenceError("invariant_measure: no convergence after " + std::to_string(max_iter) +
                         " iterations");
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw DimensionMismatch("total_variation: size mismatch");
  return 0.5 * (p - q).lpNorm<1>();
}

double log_tail_integral(const EmpiricalMeasure& nu, double t) {
  const auto& sorted = nu.sorted_real_atoms();
  if (!(t > 0.0)) throw std::invalid_argument("log_tail_integral: t must be > 0");
  double sum = 0.0;
  if (t >= 1.0) {
    for (auto it = std::upper_bound(sorted.begin(), sorted.end(), t); it != sorted.end(); ++it) {
      sum += std::log(*it);
    }
  } else {
    for (auto it = sorted.begin(); it != sorted.end() && *it < t; ++it) {
      if (*it <= 0.0) return kInf;
      sum -= std::log(*it);
    }
  }
  return sum * nu.weight();
}

std::vector<long> phase_histogram(const EmpiricalMeasure& mu, int bins) {
  if (mu.is_real()) throw DimensionMismatch("phase_histogram: needs a complex-plane measure");
  if (bins < 1) throw std::invalid_argument("phase_histogram: bins must be >= 1");
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (const Complex& z : mu.atoms()) {
    double phase = canonical_phase(z);
    if (phase < 0.0) phase += two_pi;
    auto bin = static_cast<long>(std::floor(phase / two_pi * bins));
    bin = std::clamp(bin, 0L, static_cast<long>(bins - 1));
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

double chi_square_uniform(const std::vector<long>& counts) {
  if (counts.empty()) throw std::invalid_argument("chi_square_uniform: no bins");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) return 0.0;
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

std::vector<long> value_histogram(const EmpiricalMeasure& mu, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("value_histogram: bad binning");
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : mu.sorted_real_atoms()) {
    if (v < lo || v >= hi) continue;
    auto bin = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
    bin = std::clamp(bin, 0L, static_cast<long>(bins - 1));
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

double conjugate_symmetry_defect(const EmpiricalMeasure& mu) {
  const auto& atoms = mu.atoms();
  double worst = 0.0;
  for (const Complex& z : atoms) {
    if (z.imag() == 0.0) continue;
    double best = kInf;
    for (const Complex& w : atoms) best = std::min(best, std::abs(w - std::conj(z)));
    worst = std::max(worst, best);
  }
  return worst;
}

void write_measure_csv(std::ostream& out, const EmpiricalMeasure& mu) {
  if (mu.is_real()) {
    out << "index,value\n";
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
      out << i + 1 << ',' << format_double(mu.atoms()[i].real()) << '\n';
    }
  } else {
    out << "index,re,im\n";
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
      out << i + 1 << ',' << format_double(mu.atoms()[i].real()) << ','
          << format_double(mu.atoms()[i].imag()) << '\n';
    }
  }
}

}  // namespace rmarkov
