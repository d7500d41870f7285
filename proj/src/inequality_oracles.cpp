#include "rmarkov/inequality_oracles.hpp"
#include "rmarkov/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace rmarkov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBasicTolerance = 1e-8;
constexpr double kRowBoundTolerance = 1e-8;
constexpr double kNegativeMomentTolerance = 1e-8;
constexpr double kInterlacingTolerance = 1e-8;
constexpr double kWeylTolerance = 1e-6;
constexpr double kSpecialTolerance = 1e-8;
constexpr double kSingularCutoff = 1e-12;
constexpr double kRankThreshold = 1e-10;

class MarginTracker {
 public:
  void observe(double margin, std::string_view what, Index index = -1) {
    if (std::isnan(margin)) margin = -kInf;
    if (margin < worst_) {
      worst_ = margin;
      what_ = what;
      index_ = index;
    }
  }

  CheckReport report(std::string lemma_id, double tolerance, const std::string& context) const {
    CheckReport out;
    out.lemma_id = std::move(lemma_id);
    out.worst_margin = worst_ == kInf ? 0.0 : worst_;
    out.tolerance = tolerance;
    out.passed = out.worst_margin >= -tolerance;
    out.witness = context;
    if (!what_.empty()) {
      out.witness += (context.empty() ? "" : " ") + what_;
      if (index_ >= 0) out.witness += " i=" + std::to_string(index_ + 1);
    }
    return out;
  }

 private:
  double worst_ = kInf;
  std::string what_;
  Index index_ = -1;
};

std::string shape_of(const Eigen::MatrixXd& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_of(a) + " vs " +
                                shape_of(b));
  }
}

void require_square(const Eigen::MatrixXd& a, const char* what) {
  require_finite(a, what);
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
  }
}

double positive_or_one(double scale) { return scale > 0.0 ? scale : 1.0; }

// dist(R_i, span of the other rows) for every row.
Eigen::VectorXd row_distances(const Eigen::MatrixXd& a) {
  const Index rows = a.rows();
  Eigen::VectorXd out(rows);
  for (Index i = 0; i < rows; ++i) {
    Eigen::MatrixXd others(a.cols(), rows - 1);
    for (Index j = 0, c = 0; j < rows; ++j) {
      if (j != i) others.col(c++) = a.row(j).transpose();
    }
    out(i) = distance_to_span<double>(a.row(i).transpose(), others);
  }
  return out;
}

// s_i with s_i = +inf for i < 1 and 0 for i > size (1-based).
double padded(const Eigen::VectorXd& s, Index i) {
  if (i < 1) return kInf;
  if (i > s.size()) return 0.0;
  return s(i - 1);
}

void observe_lidskii_chain(MarginTracker& tracker, const Eigen::VectorXd& from,
                           const Eigen::VectorXd& to, Index k, double scale,
                           std::string_view upper_name, std::string_view lower_name) {
  for (Index i = 1; i <= to.size(); ++i) {
    if (i - k >= 1) tracker.observe((padded(from, i - k) - to(i - 1)) / scale, upper_name, i - 1);
    tracker.observe((to(i - 1) - padded(from, i + k)) / scale, lower_name, i - 1);
  }
}

// sup_t F_x(t) - F_y(t + delta), attained at atoms of x.
double one_sided_cdf_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double delta) {
  std::vector<double> xs(x.data(), x.data() + x.size());
  std::vector<double> ys(y.data(), y.data() + y.size());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double p = static_cast<double>(xs.size());
  double gap = 0.0;
  for (double t : xs) {
    const auto fx = std::upper_bound(xs.begin(), xs.end(), t) - xs.begin();
    const auto fy = std::upper_bound(ys.begin(), ys.end(), t + delta) - ys.begin();
    gap = std::max(gap, static_cast<double>(fx - fy) / p);
  }
  return gap;
}

Eigen::MatrixXd gaussian(Index rows, Index cols, SeededStream& stream) {
  Eigen::MatrixXd a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = stream.next_gaussian();
  }
  return a;
}

// Three instance families: Gaussian, scaled Markov and column-graded Gaussian.
Eigen::MatrixXd instance_matrix(Index rows, Index cols, long family, SeededStream& stream) {
  switch (family % 3) {
    case 0:
      return gaussian(rows, cols, stream);
    case 1: {
      const Index n = std::max(rows, cols);
      const auto m = to_markov(sample_iid_matrix(n, EntryLaw::uniform(), stream)).m_matrix;
      return std::sqrt(static_cast<double>(n)) * m.topLeftCorner(rows, cols);
    }
    default: {
      Eigen::MatrixXd a = gaussian(rows, cols, stream);
      for (Index j = 0; j < cols; ++j) {
        a.col(j) *= std::ldexp(1.0, static_cast<int>(stream.next_u64() % 9) - 4);
      }
      return a;
    }
  }
}

}  // namespace

CheckReport& CheckReport::merge(const CheckReport& other) {
  const double mine = worst_margin + tolerance;
  const double theirs = other.worst_margin + other.tolerance;
  const bool take_other = theirs < mine || (theirs == mine && other.witness < witness);
  if (take_other) {
    worst_margin = other.worst_margin;
    tolerance = other.tolerance;
    witness = other.witness;
  }
  if (lemma_id.empty()) lemma_id = other.lemma_id;
  passed = passed && other.passed;
  degenerate = degenerate || other.degenerate;
  instances += other.instances;
  return *this;
}

CheckReport merged(CheckReport a, const CheckReport& b) { return a.merge(b); }

std::string CheckReport::summary_line() const {
  return lemma_id + (passed ? " PASS" : " FAIL") + " instances=" + std::to_string(instances) +
         " worst_margin=" + format_double(worst_margin) + " tolerance=" +
         format_double(tolerance) + (degenerate ? " degenerate" : "") + " witness=" + witness;
}

CheckReport check_basic_inequalities(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_square(a, "check_basic_inequalities");
  require_square(b, "check_basic_inequalities");
  require_same_shape(a, b, "check_basic_inequalities");
  const Index n = a.rows();
  const Eigen::VectorXd sa = singular_values(a);
  const Eigen::VectorXd sb = singular_values(b);
  const Eigen::VectorXd sab = singular_values(a * b);
  const Eigen::VectorXd diff = singular_values(a - b);
  const double product_scale = positive_or_one(sa(0) * sb(0));
  const double pair_scale = positive_or_one(std::max(sa(0), sb(0)));

  MarginTracker tracker;
  tracker.observe((sa(0) * sb(0) - sab(0)) / product_scale, "submultiplicative");
  for (Index i = 0; i < n; ++i) {
    tracker.observe((diff(0) - std::abs(sa(i) - sb(i))) / pair_scale, "perturbation", i);
  }
  tracker.observe((sab(n - 1) - sa(n - 1) * sb(n - 1)) / product_scale, "smallest_product");

  const Eigen::VectorXd d = a.diagonal();
  const Eigen::VectorXd sdb = singular_values(d.asDiagonal() * b);
  const double d_max = d.cwiseAbs().maxCoeff();
  const double d_min = d.cwiseAbs().minCoeff();
  const double sandwich_scale = positive_or_one(d_max * sb(0));
  for (Index i = 0; i < n; ++i) {
    tracker.observe((sdb(i) - d_min * sb(i)) / sandwich_scale, "diagonal_lower", i);
    tracker.observe((d_max * sb(i) - sdb(i)) / sandwich_scale, "diagonal_upper", i);
  }
  return tracker.report("basic", kBasicTolerance, shape_of(a));
}

CheckReport check_rv_row_bound(const Eigen::MatrixXd& a) {
  require_square(a, "check_rv_row_bound");
  const Index n = a.rows();
  const double frobenius = a.norm();
  const double scale = positive_or_one(frobenius);
  const double s_n = singular_values(a)(n - 1);
  const Eigen::VectorXd dist = row_distances(a);
  Index argmin = 0;
  const double min_dist = dist.minCoeff(&argmin);

  MarginTracker tracker;
  tracker.observe((s_n - min_dist / std::sqrt(static_cast<double>(n))) / scale, "lower");
  tracker.observe((min_dist - s_n) / scale, "upper");
  auto report = tracker.report("rvdist", kRowBoundTolerance,
                               shape_of(a) + " argmin_row=" + std::to_string(argmin + 1));
  report.degenerate = s_n < kSingularCutoff * frobenius || frobenius == 0.0;
  return report;
}

CheckReport check_tao_vu_negative_moment(const Eigen::MatrixXd& a) {
  require_finite(a, "check_tao_vu_negative_moment");
  if (a.rows() == 0 || a.rows() > a.cols()) {
    throw std::invalid_argument("check_tao_vu_negative_moment: needs 1 <= rows <= cols");
  }
  const Eigen::VectorXd s = singular_values(a);
  const double frobenius = a.norm();
  if (frobenius == 0.0 || s(s.size() - 1) < kSingularCutoff * frobenius) {
    throw RankDeficientError("check_tao_vu_negative_moment: matrix is rank deficient");
  }
  const double lhs = s.array().pow(-2.0).sum();
  const double rhs = row_distances(a).array().pow(-2.0).sum();
  MarginTracker tracker;
  tracker.observe(-std::abs(lhs - rhs) / lhs, "identity");
  return tracker.report("tvneg", kNegativeMomentTolerance, shape_of(a));
}

CheckReport check_cauchy_interlacing(const Eigen::MatrixXd& a,
                                     const std::vector<Index>& deleted_rows) {
  require_square(a, "check_cauchy_interlacing");
  const Index n = a.rows();
  std::vector<bool> deleted(static_cast<std::size_t>(n), false);
  for (Index r : deleted_rows) {
    if (r < 0 || r >= n || deleted[static_cast<std::size_t>(r)]) {
      throw std::invalid_argument("check_cauchy_interlacing: bad or repeated row index");
    }
    deleted[static_cast<std::size_t>(r)] = true;
  }
  const Index kept = n - static_cast<Index>(deleted_rows.size());
  if (kept < 1) throw std::invalid_argument("check_cauchy_interlacing: must keep a row");
  Eigen::MatrixXd b(kept, n);
  for (Index i = 0, r = 0; i < n; ++i) {
    if (!deleted[static_cast<std::size_t>(i)]) b.row(r++) = a.row(i);
  }
  const Eigen::VectorXd sa = singular_values(a);
  const Eigen::VectorXd sb = singular_values(b);
  const double scale = positive_or_one(sa(0));
  MarginTracker tracker;
  for (Index i = 0; i < kept; ++i) {
    tracker.observe((sa(i) - sb(i)) / scale, "upper", i);
    tracker.observe((sb(i) - sa(i + n - kept)) / scale, "lower", i);
  }
  return tracker.report("cauchy", kInterlacingTolerance,
                        shape_of(a) + " deleted=" + std::to_string(n - kept));
}

CheckReport check_thompson_lidskii(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_finite(a, "check_thompson_lidskii");
  require_finite(b, "check_thompson_lidskii");
  require_same_shape(a, b, "check_thompson_lidskii");
  if (a.size() == 0) throw std::invalid_argument("check_thompson_lidskii: empty matrix");
  const Eigen::VectorXd sa = singular_values(a);
  const Eigen::VectorXd sb = singular_values(b);
  const Eigen::VectorXd sd = singular_values(a - b);
  const double scale = positive_or_one(std::max({sa(0), sb(0), sd(0)}));
  const auto k = static_cast<Index>((sd.array() > kRankThreshold * scale).count());

  MarginTracker tracker;
  observe_lidskii_chain(tracker, sa, sb, k, scale, "upper", "lower");
  observe_lidskii_chain(tracker, sb, sa, k, scale, "upper_swapped", "lower_swapped");
  const double p = static_cast<double>(sa.size());
  const double delta = 1e-8 * scale;
  const double gap = std::max(one_sided_cdf_gap(sa, sb, delta), one_sided_cdf_gap(sb, sa, delta));
  tracker.observe(static_cast<double>(k) / p - gap, "cdf_gap");
  return tracker.report("thompson", kInterlacingTolerance,
                        shape_of(a) + " rank=" + std::to_string(k));
}

CheckReport check_weyl(const Eigen::MatrixXd& a) {
  require_square(a, "check_weyl");
  const Index n = a.rows();
  const double s1 = operator_norm(a);
  if (s1 == 0.0) {
    MarginTracker tracker;
    tracker.observe(0.0, "zero_matrix");
    auto report = tracker.report("weyl", kWeylTolerance, shape_of(a));
    report.degenerate = true;
    return report;
  }
  // Homogeneous in A, so work with s1 = 1 and compare products absolutely.
  const Eigen::MatrixXd unit = a / s1;
  const Eigen::VectorXd s = singular_values(unit);
  const Eigen::VectorXd modulus = eigenvalues(unit).cwiseAbs();

  MarginTracker tracker;
  double ps = 1.0;
  double pl = 1.0;
  double sum_s = 0.0;
  double sum_l = 0.0;
  double tail_s = 1.0;
  double tail_l = 1.0;
  for (Index k = 0; k < n; ++k) {
    ps *= s(k);
    pl *= modulus(k);
    sum_s += s(k);
    sum_l += modulus(k);
    tail_s *= s(n - 1 - k);
    tail_l *= modulus(n - 1 - k);
    tracker.observe(ps - pl, "leading_product", k);
    tracker.observe((sum_s - sum_l) / sum_s, "leading_sum", k);
    tracker.observe(tail_l - tail_s, "trailing_product", k);
  }
  tracker.observe(-std::abs(ps - pl), "determinant");
  const double moment_s = s.squaredNorm();
  tracker.observe((moment_s - modulus.squaredNorm()) / moment_s, "second_moment");
  auto report = tracker.report("weyl", kWeylTolerance, shape_of(a));
  report.degenerate = s(n - 1) < kSingularCutoff * s.norm();
  return report;
}

Eigen::MatrixXcd special_matrix(Index n, const Complex& w) {
  if (n < 1) throw std::invalid_argument("special_matrix: n must be >= 1");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
  a.col(0).array() -= w;
  return a;
}

Eigen::Matrix2cd special_matrix_core(Index n, const Complex& w) {
  if (n < 2) throw std::invalid_argument("special_matrix_core: n must be >= 2");
  // Basis e1, (ones - e1) / sqrt(n - 1): A_w acts as this block and as the
  // identity on the orthogonal complement.
  Eigen::Matrix2cd core;
  core << 1.0 - w, 0.0, -w * std::sqrt(static_cast<double>(n - 1)), 1.0;
  return core;
}

QuadraticRoots special_matrix_roots(Index n, const Complex& w) {
  const double c = std::norm(1.0 - w);
  const double b = 1.0 + static_cast<double>(n - 1) * std::norm(w) + c;
  const double root = std::sqrt(std::max(b * b - 4.0 * c, 0.0));
  const double larger = 0.5 * (b + root);
  return {larger, larger > 0.0 ? c / larger : 0.0};
}

double special_matrix_limit(const Complex& z) {
  const double r = std::abs(z);
  return std::sqrt(2.0) / std::sqrt(2.0 + r * r + r * std::sqrt(4.0 + r * r));
}

CheckReport check_special_matrix_A(Index n, const Complex& z) {
  if (n < 2) throw std::invalid_argument("check_special_matrix_A: n must be >= 2");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument("check_special_matrix_A: z must be finite");
  }
  const Complex w = z / std::sqrt(static_cast<double>(n));
  const bool dense = n <= kSpecialMatrixDenseLimit;
  Eigen::VectorXd s;
  if (dense) {
    const Eigen::MatrixXcd a = special_matrix(n, w);
    s = w.imag() == 0.0 ? Eigen::VectorXd(singular_values(Eigen::MatrixXd(a.real())))
                        : singular_values(a);
  } else {
    s = singular_values(special_matrix_core(n, w));
  }
  const QuadraticRoots roots = special_matrix_roots(n, w);
  const double c = std::norm(1.0 - w);
  const double b = 1.0 + static_cast<double>(n - 1) * std::norm(w) + c;
  const double s_max = s(0);
  const double s_min = s(s.size() - 1);
  const double value_scale = std::max(1.0, s_max);

  MarginTracker tracker;
  if (dense) {
    // Unit singular values are held to 1e-9, a tenth of the report tolerance.
    for (Index i = 1; i + 1 < n; ++i) {
      tracker.observe(-10.0 * std::abs(s(i) - 1.0), "unit_value", i);
    }
  }
  tracker.observe(-std::abs(s_max - std::sqrt(roots.larger)) / value_scale, "largest_root");
  tracker.observe(-std::abs(s_min - std::sqrt(roots.smaller)) / value_scale, "smallest_root");
  for (double v : {s_max, s_min}) {
    const double x = v * v;
    tracker.observe(-std::abs(x * x - b * x + c) / (1.0 + b + c), "quadratic_residual");
  }
  if (n >= 10000) {
    tracker.observe(2.0 / std::sqrt(static_cast<double>(n)) -
                        std::abs(s_min - special_matrix_limit(z)),
                    "limit");
  }
  auto report = tracker.report(
      "A", kSpecialTolerance,
      "n=" + std::to_string(n) + " z=" + format_complex(z) + (dense ? " dense" : " core"));
  report.degenerate = std::abs(1.0 - w) == 0.0;
  return report;
}

CheckReport check_distance_concentration(Index n, const EntryLaw& law, Index dim_h, long replicas,
                                         SeededStream stream) {
  if (n < 1 || dim_h < 0 || dim_h >= n) {
    throw std::invalid_argument("check_distance_concentration: need 0 <= dim_h <= n - 1");
  }
  if (replicas < 1) throw std::invalid_argument("check_distance_concentration: replicas >= 1");
  if (!law.has_finite_variance()) {
    throw std::invalid_argument("check_distance_concentration: law needs finite variance");
  }
  SeededStream basis_stream = stream.substream(0);
  SeededStream row_stream = stream.substream(1);
  const SpanProjector<double> projector(n, gaussian(n, dim_h, basis_stream));
  const double nn = static_cast<double>(n);
  const double threshold = 0.5 * law.stddev() * std::sqrt(nn - static_cast<double>(dim_h));

  long violations = 0;
  double worst_ratio = kInf;
  Eigen::VectorXd row(n);
  for (long r = 0; r < replicas; ++r) {
    for (Index j = 0; j < n; ++j) row(j) = law.sample(row_stream);
    const double dist = projector.distance(row);
    worst_ratio = std::min(worst_ratio, dist / threshold);
    if (dist <= threshold) ++violations;
  }
  const double frequency = static_cast<double>(violations) / static_cast<double>(replicas);
  const double allowed = std::max(10.0 * std::exp(-std::pow(nn, 0.01)),
                                  5.0 / static_cast<double>(replicas));
  const bool literal = static_cast<double>(dim_h) >= 1.0 &&
                       static_cast<double>(dim_h) <= nn - std::pow(nn, 0.99);

  CheckReport report;
  report.lemma_id = "concdist";
  report.worst_margin = allowed - frequency;
  report.tolerance = 0.0;
  report.passed = report.worst_margin >= 0.0;
  report.instances = replicas;
  report.witness = "n=" + std::to_string(n) + " dim_h=" + std::to_string(dim_h) +
                   " frequency=" + format_double(frequency) +
                   " min_dist_ratio=" + format_double(worst_ratio) +
                   (literal ? " dim_constraint=held" : " dim_constraint=outside");
  return report;
}

std::string_view lemma_name(Lemma lemma) {
  switch (lemma) {
    case Lemma::basic: return "basic";
    case Lemma::rvdist: return "rvdist";
    case Lemma::tvneg: return "tvneg";
    case Lemma::cauchy: return "cauchy";
    case Lemma::thompson: return "thompson";
    case Lemma::weyl: return "weyl";
    case Lemma::special_a: return "A";
    case Lemma::concdist: return "concdist";
  }
  return "";
}

std::optional<Lemma> parse_lemma(std::string_view name) {
  for (Lemma l : {Lemma::basic, Lemma::rvdist, Lemma::tvneg, Lemma::cauchy, Lemma::thompson,
                  Lemma::weyl, Lemma::special_a, Lemma::concdist}) {
    if (lemma_name(l) == name) return l;
  }
  return std::nullopt;
}

const std::vector<Lemma>& fuzzable_lemmas() {
  static const std::vector<Lemma> lemmas = {Lemma::basic,    Lemma::rvdist, Lemma::tvneg,
                                            Lemma::cauchy,   Lemma::thompson, Lemma::weyl,
                                            Lemma::special_a};
  return lemmas;
}

namespace {

CheckReport run_instance(Lemma lemma, Index n, long family, SeededStream& stream) {
  switch (lemma) {
    case Lemma::basic: {
      Eigen::MatrixXd a = instance_matrix(n, n, family, stream);
      if (family % 4 == 3) a = Eigen::MatrixXd(a.diagonal().asDiagonal());
      return check_basic_inequalities(a, instance_matrix(n, n, family / 3, stream));
    }
    case Lemma::rvdist:
      return check_rv_row_bound(instance_matrix(n, n, family, stream));
    case Lemma::tvneg: {
      const Index rows = 1 + static_cast<Index>(stream.next_u64() % static_cast<std::uint64_t>(n));
      return check_tao_vu_negative_moment(instance_matrix(rows, n, family, stream));
    }
    case Lemma::cauchy: {
      std::vector<Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(stream.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
      const auto count = static_cast<Index>(stream.next_u64() % static_cast<std::uint64_t>(n));
      order.resize(static_cast<std::size_t>(count));
      return check_cauchy_interlacing(instance_matrix(n, n, family, stream), order);
    }
    case Lemma::thompson: {
      const Eigen::MatrixXd a = instance_matrix(n, n, family, stream);
      const Index rank = family % 4;
      const Eigen::MatrixXd u = gaussian(n, rank, stream);
      const Eigen::MatrixXd v = gaussian(n, rank, stream);
      return check_thompson_lidskii(a, a + u * v.transpose());
    }
    case Lemma::weyl: {
      Eigen::MatrixXd a = instance_matrix(n, n, family, stream);
      if (family % 5 == 4) a = Eigen::MatrixXd(a + a.transpose());
      return check_weyl(a);
    }
    case Lemma::special_a: {
      const double radius = 3.0 * std::sqrt(stream.next_uniform());
      const Complex z = std::polar(radius, 2.0 * std::numbers::pi * stream.next_uniform());
      return check_special_matrix_A(std::max<Index>(n - 1, 2), z);
    }
    case Lemma::concdist:
      break;
  }
  throw std::logic_error("run_instance: unsupported lemma");
}

}  // namespace

CheckReport fuzz_lemma(Lemma lemma, long instances_per_size, std::uint64_t seed, Index min_size,
                       Index max_size) {
  if (instances_per_size < 1 || min_size < 2 || max_size < min_size) {
    throw std::invalid_argument("fuzz_lemma: bad instance count or size range");
  }
  const std::uint64_t lemma_seed =
      SeededStream::derive_key(seed, static_cast<std::uint64_t>(lemma));
  std::optional<CheckReport> total;
  for (Index n = min_size; n <= max_size; ++n) {
    if (lemma == Lemma::concdist) {
      SeededStream stream(lemma_seed, static_cast<std::uint64_t>(n));
      const auto report = check_distance_concentration(
          n, EntryLaw::exponential(), n / 2, instances_per_size, stream);
      total ? total->merge(report) : total.emplace(report);
      continue;
    }
    for (long i = 0; i < instances_per_size; ++i) {
      const auto index = static_cast<std::uint64_t>(n) * 1'000'000'007ULL + static_cast<std::uint64_t>(i);
      SeededStream stream(lemma_seed, index);
      CheckReport report = run_instance(lemma, n, i, stream);
      report.witness += " seed=" + std::to_string(seed) + " instance=" + std::to_string(index);
      report.lemma_id = std::string(lemma_name(lemma));
      total ? total->merge(report) : total.emplace(report);
    }
  }
  return *total;
}

}  // namespace rmarkov
