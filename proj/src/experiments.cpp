#include "rmarkov/experiments.hpp"
#include "rmarkov/io.hpp"
#include "rmarkov/spectral_statistics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace rmarkov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPerronTolerance = 1e-9;
constexpr double kConjugateTolerance = 1e-8;
constexpr double kBulkDistanceTolerance = 0.06;
constexpr double kTopSingularTolerance = 0.05;
constexpr double kSecondSingularTolerance = 0.25;
constexpr double kSubdominantSlack = 0.3;
constexpr double kSecondMomentTolerance = 0.15;
constexpr double kBulkMomentTolerance = 0.1;
constexpr double kDecayExponentCap = 6.0;
constexpr double kAwayFromSupportSlack = 0.3;
constexpr double kRowSumTolerance = 0.15;
constexpr Index kRowSumCheckN = 1600;
constexpr int kHistogramBins = 64;
constexpr int kPhaseBins = 16;
constexpr Index kMomentTrendStep = 4;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(trim(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename Integer>
Integer parse_integer(std::string_view key, const std::string& text) {
  Integer value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + text + "'");
  }
  return value;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double maximum(const std::vector<double>& values) {
  return *std::max_element(values.begin(), values.end());
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

std::string fixed2(double value) {
  char buffer[64];
  const auto [ptr, ec] =
      std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::fixed, 2);
  return ec == std::errc() ? std::string(buffer, ptr) : std::string("0");
}

std::string z_label(const std::string& statistic, const Complex& z) {
  return statistic + "[z=" + format_complex(z) + "]";
}

// Grid bookkeeping shared by all runners.
class Grid {
 public:
  explicit Grid(const ExperimentConfig& config) : sizes_(config.n_values) {
    std::sort(sizes_.begin(), sizes_.end());
    sizes_.erase(std::unique(sizes_.begin(), sizes_.end()), sizes_.end());
  }

  const std::vector<Index>& sizes() const { return sizes_; }
  Index largest() const { return sizes_.back(); }
  bool asserts(Index n, Index min_n = kDeskScaleN) const {
    return n == largest() && largest() >= min_n;
  }
  bool asserts_trend(Index min_step = 1) const {
    for (std::size_t i = 1; i < sizes_.size(); ++i) {
      if (sizes_[i] < min_step * sizes_[i - 1]) return false;
    }
    return sizes_.size() >= 2 && largest() >= kDeskScaleN;
  }

 private:
  std::vector<Index> sizes_;
};

std::optional<bool> gate(bool asserted, bool ok) {
  return asserted ? std::optional<bool>(ok) : std::nullopt;
}

SummaryRow at_most(Index n, std::string statistic, double value, double reference,
                   double tolerance, bool asserted, std::string source) {
  return {n, std::move(statistic), value, reference, tolerance,
          gate(asserted, value <= reference + tolerance), std::move(source)};
}

SummaryRow within(Index n, std::string statistic, double value, double reference, double tolerance,
                  bool asserted, std::string source) {
  return {n, std::move(statistic), value, reference, tolerance,
          gate(asserted, std::abs(value - reference) <= tolerance), std::move(source)};
}

SummaryRow info(Index n, std::string statistic, double value, double reference,
                std::string source) {
  return {n, std::move(statistic), value, reference, 0.0, std::nullopt, std::move(source)};
}

SummaryRow trend_row(Index n, std::string statistic, const std::vector<double>& medians,
                     bool asserted, std::string source) {
  const bool ok = strictly_decreasing(medians);
  return {n, std::move(statistic), ok ? 1.0 : 0.0, 1.0, 0.0, gate(asserted, ok),
          std::move(source)};
}

void require_finite_variance(const ExperimentConfig& config) {
  if (!config.law.has_finite_variance() || !std::isfinite(config.law.mean())) {
    throw ConfigError("experiment '" + std::string(experiment_name(config.experiment)) +
                      "' needs a law with finite mean and variance");
  }
}

// Runs one replica body per index with the kernel error annotated.
template <typename Body>
void for_each_replica(const ExperimentConfig& config, Index n, Body&& body) {
  parallel_for(config.replicas, config.threads, [&](long r) {
    try {
      body(r, replica_stream(config.master_seed, n, r));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (n=" + std::to_string(n) +
                             ", replica=" + std::to_string(r) + ")");
    }
  });
}

Eigen::MatrixXd sample_markov(Index n, const EntryLaw& law, SeededStream stream) {
  return to_markov(sample_iid_matrix(n, law, stream)).m_matrix;
}

class ArtifactWriter {
 public:
  ArtifactWriter(const ExperimentConfig& config, ExperimentReport& report)
      : dir_(config.output_dir), report_(report) {}

  bool enabled() const { return !dir_.empty(); }

  void measure(Index n, long replica, const EmpiricalMeasure& mu) {
    if (!enabled()) return;
    write("spectrum_" + std::to_string(n) + "_" + std::to_string(replica) + ".csv",
          [&](std::ostream& out) { write_measure_csv(out, mu); });
  }

  void figure(Index n, const std::string& svg) {
    if (!enabled()) return;
    write("figure_" + std::to_string(n) + ".svg", [&](std::ostream& out) { out << svg; });
  }

 private:
  template <typename Fn>
  void write(const std::string& name, Fn&& fn) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    report_.artifacts.push_back(path);
  }

  std::filesystem::path dir_;
  ExperimentReport& report_;
};

}  // namespace

std::string_view experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::quartercircle: return "quartercircle";
    case ExperimentId::circular: return "circular";
    case ExperimentId::extremes: return "extremes";
    case ExperimentId::resolvent: return "resolvent";
    case ExperimentId::perturbation: return "perturbation";
    case ExperimentId::moments: return "moments";
  }
  return "";
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids = {
      ExperimentId::quartercircle, ExperimentId::circular,     ExperimentId::extremes,
      ExperimentId::resolvent,     ExperimentId::perturbation, ExperimentId::moments};
  return ids;
}

std::optional<ExperimentId> parse_experiment(std::string_view name) {
  for (ExperimentId id : all_experiments()) {
    if (experiment_name(id) == name) return id;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (n_values.empty()) throw ConfigError("n grid is empty");
  const Index smallest = *std::min_element(n_values.begin(), n_values.end());
  if (smallest < 2) throw ConfigError("every n must be >= 2");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (z_grid.empty()) throw ConfigError("z grid is empty");
  for (const Complex& z : z_grid) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConfigError("z values must be finite");
    }
  }
  if (remove_top < 0 || remove_top >= smallest) {
    throw ConfigError("remove_top must lie in [0, min n - 1]");
  }
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

void apply_setting(ExperimentConfig& config, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  try {
    if (key == "experiment") {
      const auto id = parse_experiment(value);
      if (!id) throw ConfigError("unknown experiment '" + value + "'");
      config.experiment = *id;
    } else if (key == "n") {
      config.n_values.clear();
      for (const auto& item : split_list(value)) {
        config.n_values.push_back(parse_integer<Index>(key, item));
      }
    } else if (key == "law") {
      config.law = EntryLaw::parse(value);
    } else if (key == "replicas") {
      config.replicas = parse_integer<long>(key, value);
    } else if (key == "seed") {
      config.master_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "z") {
      config.z_grid.clear();
      for (const auto& item : split_list(value)) config.z_grid.push_back(parse_complex(item));
    } else if (key == "out") {
      config.output_dir = value;
    } else if (key == "remove_top") {
      config.remove_top = parse_integer<Index>(key, value);
    } else if (key == "threads") {
      config.threads = parse_integer<unsigned>(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    }
    apply_setting(base, std::string_view(content).substr(0, eq),
                  std::string_view(content).substr(eq + 1));
  }
  return base;
}

ExperimentConfig read_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

bool ExperimentReport::passed() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SummaryRow& row) { return row.pass.value_or(true); });
}

const SummaryRow* ExperimentReport::find(Index n, std::string_view statistic) const {
  for (const auto& row : rows) {
    if (row.n == n && row.statistic == statistic) return &row;
  }
  return nullptr;
}

SeededStream replica_stream(std::uint64_t master_seed, Index n, long replica) {
  return SeededStream(master_seed,
                      (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(replica));
}

void parallel_for(long count, unsigned threads, const std::function<void(long)>& body) {
  if (count <= 0) return;
  const auto workers = static_cast<long>(std::min<unsigned long>(
      std::max(threads, 1u), static_cast<unsigned long>(count)));
  if (workers == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex error_mutex;
  long error_index = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        // Keep the lowest failing index so the reported error is schedule independent.
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double loop_moment_statistic(const Eigen::MatrixXd& m_matrix, int r) {
  const double n = static_cast<double>(m_matrix.rows());
  return std::pow(n, 0.5 * r) * (loop_probability_moment(m_matrix, r) - 1.0 / n);
}

ExperimentReport run_quartercircle(const ExperimentConfig& config) {
  config.validate();
  require_finite_variance(config);
  const Grid grid(config);
  const double radius = config.law.effective_radius();
  const auto law = ReferenceLaw::quartercircular(radius);
  ExperimentReport report{ExperimentId::quartercircle, {}, {}};
  ArtifactWriter artifacts(config, report);
  std::vector<double> medians;

  for (Index n : grid.sizes()) {
    std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      const Eigen::MatrixXd m = sample_markov(n, config.law, stream);
      values[static_cast<std::size_t>(r)] = singular_values(std::sqrt(static_cast<double>(n)) * m);
    });

    std::vector<double> ks;
    std::vector<double> moment;
    std::vector<double> bulk_moment;
    std::vector<double> top;
    std::vector<double> pooled;
    for (long r = 0; r < config.replicas; ++r) {
      const auto nu = EmpiricalMeasure::on_real_line(values[static_cast<std::size_t>(r)]);
      const auto bulk = nu.without_top(config.remove_top);
      ks.push_back(kolmogorov_distance(bulk, law));
      moment.push_back(nu.absolute_moment(2));
      bulk_moment.push_back(nu.without_top(1).absolute_moment(2));
      top.push_back(values[static_cast<std::size_t>(r)](0));
      pooled.insert(pooled.end(), bulk.sorted_real_atoms().begin(), bulk.sorted_real_atoms().end());
      artifacts.measure(n, r, nu);
    }
    medians.push_back(median(ks));
    const bool asserted = grid.asserts(n);
    const std::string source = "quartercircular law";
    report.rows.push_back(at_most(n, "ks_median", medians.back(), 0.0, kBulkDistanceTolerance,
                                  asserted, source));
    report.rows.push_back(info(n, "ks_max", maximum(ks), 0.0, source));
    report.rows.push_back(within(n, "second_moment_mean", mean(moment), 1.0 + radius * radius,
                                 kSecondMomentTolerance, asserted, "second moment"));
    report.rows.push_back(within(n, "bulk_second_moment_mean", mean(bulk_moment),
                                 radius * radius, kBulkMomentTolerance, asserted,
                                 "second moment"));
    report.rows.push_back(info(n, "s1_over_sqrt_n_median",
                               median(top) / std::sqrt(static_cast<double>(n)), 1.0,
                               "top singular value"));
    artifacts.figure(n, render_histogram_svg(
                            pooled, kHistogramBins, 0.0, 2.5 * radius,
                            [&](double t) { return quartercircular_density(t, radius); },
                            "singular values of sqrt(n) M, n=" + std::to_string(n) + ", " +
                                config.law.to_string()));
  }
  if (grid.sizes().size() >= 2) {
    report.rows.push_back(trend_row(grid.largest(), "ks_median_strictly_decreasing", medians,
                                    grid.asserts_trend(), "quartercircular law"));
  }
  return report;
}

ExperimentReport run_circular(const ExperimentConfig& config) {
  config.validate();
  require_finite_variance(config);
  const Grid grid(config);
  const double radius = config.law.effective_radius();
  ExperimentReport report{ExperimentId::circular, {}, {}};
  ArtifactWriter artifacts(config, report);
  std::vector<double> medians;

  for (Index n : grid.sizes()) {
    std::vector<Eigen::VectorXcd> values(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      const Eigen::MatrixXd m = sample_markov(n, config.law, stream);
      values[static_cast<std::size_t>(r)] = eigenvalues(std::sqrt(static_cast<double>(n)) * m);
    });

    std::vector<double> distance;
    std::vector<double> defect;
    std::vector<double> chi2;
    std::vector<double> inner;
    std::vector<double> second;
    std::vector<Complex> pooled;
    for (long r = 0; r < config.replicas; ++r) {
      const auto mu = EmpiricalMeasure::on_complex_plane(values[static_cast<std::size_t>(r)]);
      const auto bulk = mu.without_top(config.remove_top).scaled(1.0 / radius);
      distance.push_back(kolmogorov_distance(bulk, ReferenceLaw::circular(1.0)));
      defect.push_back(conjugate_symmetry_defect(mu));
      chi2.push_back(chi_square_uniform(phase_histogram(bulk, kPhaseBins)));
      double inside = 0.0;
      for (const Complex& z : bulk.atoms()) inside += std::abs(z) <= 0.5 ? 1.0 : 0.0;
      inner.push_back(inside * bulk.weight());
      if (mu.size() > 1) second.push_back(std::abs(mu.atoms()[1]) / radius);
      pooled.insert(pooled.end(), bulk.atoms().begin(), bulk.atoms().end());
      artifacts.measure(n, r, mu);
    }
    medians.push_back(median(distance));
    const std::string source = "circular law";
    report.rows.push_back(at_most(n, "radial_ks_median", medians.back(), 0.0,
                                  kBulkDistanceTolerance, grid.asserts(n), source));
    report.rows.push_back(at_most(n, "conjugate_defect_max", maximum(defect), 0.0,
                                  kConjugateTolerance, true, "real matrix spectrum"));
    report.rows.push_back(info(n, "phase_chi2_median", median(chi2),
                               static_cast<double>(kPhaseBins - 1), "phase uniformity"));
    report.rows.push_back(info(n, "inner_disc_fraction_median", median(inner), 0.25, source));
    if (!second.empty()) {
      report.rows.push_back(
          info(n, "lambda2_over_radius_median", median(second), 1.0, "subdominant eigenvalue"));
    }
    artifacts.figure(n, render_scatter_svg(pooled, 1.0, 1.5,
                                           "eigenvalues of sqrt(n) M scaled by m/sigma, n=" +
                                               std::to_string(n) + ", " +
                                               config.law.to_string()));
  }
  if (grid.sizes().size() >= 2) {
    report.rows.push_back(info(grid.largest(), "radial_ks_median_strictly_decreasing",
                               strictly_decreasing(medians) ? 1.0 : 0.0, 1.0, "circular law"));
  }
  return report;
}

ExperimentReport run_extremes(const ExperimentConfig& config) {
  config.validate();
  require_finite_variance(config);
  const Grid grid(config);
  const double radius = config.law.effective_radius();
  ExperimentReport report{ExperimentId::extremes, {}, {}};
  ArtifactWriter artifacts(config, report);

  for (Index n : grid.sizes()) {
    std::vector<Spectrum> spectra(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      spectra[static_cast<std::size_t>(r)] = spectrum(sample_markov(n, config.law, stream));
    });
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> perron;
    std::vector<double> excess;
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<double> lambda2;
    std::vector<double> ratio;
    std::vector<double> bulk_real;
    for (long r = 0; r < config.replicas; ++r) {
      const Spectrum& sp = spectra[static_cast<std::size_t>(r)];
      const Eigen::VectorXcd& lambda = sp.eigenvalues;
      perron.push_back((lambda.array() - 1.0).abs().minCoeff());
      excess.push_back(std::max(0.0, std::abs(lambda(0)) - 1.0));
      s1.push_back(std::abs(sp.singular_values(0) - 1.0));
      s2.push_back(std::abs(root_n * sp.singular_values(1) - 2.0 * radius));
      lambda2.push_back(root_n * std::abs(lambda(1)));
      ratio.push_back(std::abs(sp.singular_values(0) / std::abs(lambda(0)) - 1.0));
      double rightmost = -kInf;
      for (Eigen::Index k = 1; k < lambda.size(); ++k) rightmost = std::max(rightmost, lambda(k).real());
      bulk_real.push_back(root_n * rightmost);
      artifacts.measure(n, r, esd_eigen(sp));
    }
    const bool asserted = grid.asserts(n);
    report.rows.push_back(
        at_most(n, "lambda1_error_max", maximum(perron), 0.0, kPerronTolerance, true,
                "Perron value"));
    report.rows.push_back(at_most(n, "spectral_radius_excess_max", maximum(excess), 0.0,
                                  kPerronTolerance, true, "Perron value"));
    report.rows.push_back(at_most(n, "s1_deviation_max", maximum(s1), 0.0, kTopSingularTolerance,
                                  asserted, "top singular value of M"));
    report.rows.push_back(at_most(n, "s2_deviation_max", maximum(s2), 0.0,
                                  kSecondSingularTolerance * radius, asserted,
                                  "second singular value of sqrt(n) M"));
    report.rows.push_back(at_most(n, "lambda2_max", maximum(lambda2), 2.0 * radius,
                                  kSubdominantSlack * radius, asserted,
                                  "subdominant eigenvalue bound"));
    report.rows.push_back(at_most(n, "s1_over_lambda1_deviation_max", maximum(ratio), 0.0,
                                  kTopSingularTolerance, asserted, "top singular value of M"));
    report.rows.push_back(info(n, "lambda2_over_radius_median", median(lambda2) / radius, 1.0,
                               "subdominant eigenvalue"));
    report.rows.push_back(info(n, "lambda2_over_radius_spread",
                               (maximum(lambda2) - *std::min_element(lambda2.begin(), lambda2.end())) /
                                   radius,
                               0.0, "subdominant eigenvalue"));
    report.rows.push_back(info(n, "bulk_max_real_part_over_radius_median",
                               median(bulk_real) / radius, 1.0, "subdominant eigenvalue"));
  }
  return report;
}

ExperimentReport run_resolvent_bound(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config);
  const double radius = config.law.has_finite_variance() && std::isfinite(config.law.mean())
                            ? config.law.effective_radius()
                            : kInf;
  const auto zs = config.z_grid;
  ExperimentReport report{ExperimentId::resolvent, {}, {}};
  std::vector<std::vector<double>> minima(zs.size());

  for (Index n : grid.sizes()) {
    std::vector<std::vector<double>> smallest(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      const Eigen::MatrixXd a = std::sqrt(static_cast<double>(n)) * sample_markov(n, config.law, stream);
      auto& out = smallest[static_cast<std::size_t>(r)];
      for (const Complex& z : zs) {
        if (z.imag() == 0.0) {
          Eigen::MatrixXd shifted = a;
          shifted.diagonal().array() -= z.real();
          out.push_back(smallest_singular_value(shifted));
        } else {
          Eigen::MatrixXcd shifted = a.cast<Complex>();
          shifted.diagonal().array() -= z;
          out.push_back(smallest_singular_value(shifted));
        }
      }
    });
    for (std::size_t k = 0; k < zs.size(); ++k) {
      double lowest = kInf;
      for (const auto& row : smallest) lowest = std::min(lowest, row[k]);
      minima[k].push_back(lowest);
      report.rows.push_back({n, z_label("min_sn", zs[k]), lowest, 0.0, 0.0,
                             std::optional<bool>(lowest > 0.0), "invertibility"});
      if (std::abs(zs[k]) > 2.0 * radius && n == grid.largest()) {
        const double floor = std::abs(zs[k]) - 2.0 * radius - kAwayFromSupportSlack;
        report.rows.push_back({n, z_label("min_sn_away_from_support", zs[k]), lowest, floor, 0.0,
                               gate(grid.asserts(n), lowest >= floor),
                               "smallest singular value away from the support"});
      }
    }
  }

  const Index top = grid.largest();
  double max_modulus = 0.0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    max_modulus = std::max(max_modulus, std::abs(zs[k]));
    // Smallest b with min s_n >= n^{-b} at every n of the grid.
    double b_hat = -kInf;
    for (std::size_t i = 0; i < grid.sizes().size(); ++i) {
      const double log_n = std::log(static_cast<double>(grid.sizes()[i]));
      b_hat = std::max(b_hat, minima[k][i] > 0.0 ? -std::log(minima[k][i]) / log_n : kInf);
    }
    report.rows.push_back({top, z_label("b_hat", zs[k]), b_hat, kDecayExponentCap, 0.0,
                           std::optional<bool>(b_hat <= kDecayExponentCap),
                           "polynomial lower bound exponent"});
    if (grid.sizes().size() >= 2) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      const double count = static_cast<double>(grid.sizes().size());
      for (std::size_t i = 0; i < grid.sizes().size(); ++i) {
        const double x = std::log(static_cast<double>(grid.sizes()[i]));
        const double y = std::log(minima[k][i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
      report.rows.push_back(info(top, z_label("log_log_slope", zs[k]), slope, 0.0,
                                 "polynomial lower bound exponent"));
    }
  }
  report.rows.push_back(info(top, "z_grid_max_modulus", max_modulus, 0.0, "shift grid"));
  return report;
}

ExperimentReport run_perturbation_gap(const ExperimentConfig& config) {
  config.validate();
  require_finite_variance(config);
  const Grid grid(config);
  const double m = config.law.mean();
  ExperimentReport report{ExperimentId::perturbation, {}, {}};
  ArtifactWriter artifacts(config, report);
  std::vector<double> gap_medians;
  std::vector<double> row_medians;

  for (Index n : grid.sizes()) {
    struct Replica {
      Eigen::VectorXd markov;
      double gap = 0.0;
      double row = 0.0;
    };
    std::vector<Replica> results(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      // Both pipelines share the same X.
      const MarkovSample s = to_markov(sample_iid_matrix(n, config.law, stream));
      const double root_n = std::sqrt(static_cast<double>(n));
      const Eigen::VectorXd sm = singular_values(root_n * s.m_matrix);
      const Eigen::VectorXd sx = singular_values(s.x / (m * root_n));
      double gap = 0.0;
      for (Index i = 0; i < n; ++i) {
        gap = (sm(i) > 0.0 && sx(i) > 0.0) ? std::max(gap, std::abs(std::log(sm(i) / sx(i))))
                                           : kInf;
        if (gap == kInf) break;
      }
      const Eigen::VectorXd d = s.d_diagonal();
      auto& out = results[static_cast<std::size_t>(r)];
      out.markov = sm;
      out.gap = gap;
      out.row = (static_cast<double>(n) * m * d.array() - 1.0).abs().maxCoeff();
    });
    std::vector<double> gaps;
    std::vector<double> rows;
    for (long r = 0; r < config.replicas; ++r) {
      gaps.push_back(results[static_cast<std::size_t>(r)].gap);
      rows.push_back(results[static_cast<std::size_t>(r)].row);
      artifacts.measure(n, r,
                        EmpiricalMeasure::on_real_line(results[static_cast<std::size_t>(r)].markov));
    }
    gap_medians.push_back(median(gaps));
    row_medians.push_back(median(rows));
    report.rows.push_back(info(n, "log_singular_gap_median", gap_medians.back(), 0.0,
                               "log singular value perturbation"));
    report.rows.push_back(at_most(n, "row_normalizer_deviation_median", row_medians.back(), 0.0,
                                  kRowSumTolerance, grid.asserts(n, kRowSumCheckN),
                                  "row sum normalization"));
  }
  if (grid.sizes().size() >= 2) {
    report.rows.push_back(trend_row(grid.largest(), "log_singular_gap_strictly_decreasing",
                                    gap_medians, grid.asserts_trend(),
                                    "log singular value perturbation"));
    report.rows.push_back(info(grid.largest(), "row_normalizer_strictly_decreasing",
                               strictly_decreasing(row_medians) ? 1.0 : 0.0, 1.0,
                               "row sum normalization"));
  }
  return report;
}

ExperimentReport run_moments_and_invariant(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config);
  constexpr int kMaxPower = 3;
  ExperimentReport report{ExperimentId::moments, {}, {}};
  std::vector<double> second_medians;

  for (Index n : grid.sizes()) {
    struct Replica {
      std::array<double, kMaxPower> statistic{};
      double tv = 0.0;
      bool reducible = false;
    };
    std::vector<Replica> results(static_cast<std::size_t>(config.replicas));
    for_each_replica(config, n, [&](long r, SeededStream stream) {
      const Eigen::MatrixXd m = sample_markov(n, config.law, stream);
      auto& out = results[static_cast<std::size_t>(r)];
      const double nn = static_cast<double>(n);
      // trace(M^2) and trace(M^3) from one product.
      const Eigen::MatrixXd m2 = m * m;
      const std::array<double, kMaxPower> traces = {
          m.trace(), m2.trace(), m2.cwiseProduct(m.transpose()).sum()};
      for (int p = 1; p <= kMaxPower; ++p) {
        out.statistic[static_cast<std::size_t>(p - 1)] =
            std::pow(nn, 0.5 * p) * (traces[static_cast<std::size_t>(p - 1)] / nn - 1.0 / nn);
      }
      try {
        const Eigen::VectorXd kappa = invariant_measure(m, 1e-12);
        out.tv = total_variation(kappa, Eigen::VectorXd::Constant(n, 1.0 / nn));
      } catch (const ReducibleChainError&) {
        out.reducible = true;
      }
    });
    for (int p = 1; p <= kMaxPower; ++p) {
      std::vector<double> values;
      for (const auto& rep : results) {
        values.push_back(std::abs(rep.statistic[static_cast<std::size_t>(p - 1)]));
      }
      if (p == 2) second_medians.push_back(median(values));
      report.rows.push_back(info(n, "loop_statistic_abs_median[r=" + std::to_string(p) + "]",
                                 median(values), 0.0, "loop probabilities"));
    }
    std::vector<double> tv;
    double reducible = 0.0;
    for (const auto& rep : results) {
      if (rep.reducible) {
        reducible += 1.0;
      } else {
        tv.push_back(rep.tv);
      }
    }
    if (!tv.empty()) {
      report.rows.push_back(info(n, "tv_invariant_uniform_median", median(tv), 0.0,
                                 "invariant measure"));
    }
    report.rows.push_back(info(n, "reducible_count", reducible, 0.0, "invariant measure"));
  }
  if (grid.sizes().size() >= 2) {
    report.rows.push_back(trend_row(grid.largest(), "loop_statistic_r2_strictly_decreasing",
                                    second_medians, grid.asserts_trend(kMomentTrendStep),
                                    "loop probabilities"));
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);
  ExperimentReport report;
  switch (config.experiment) {
    case ExperimentId::quartercircle: report = run_quartercircle(config); break;
    case ExperimentId::circular: report = run_circular(config); break;
    case ExperimentId::extremes: report = run_extremes(config); break;
    case ExperimentId::resolvent: report = run_resolvent_bound(config); break;
    case ExperimentId::perturbation: report = run_perturbation_gap(config); break;
    case ExperimentId::moments: report = run_moments_and_invariant(config); break;
  }
  if (!config.output_dir.empty()) {
    const auto summary = config.output_dir / "summary.csv";
    const auto text = config.output_dir / "report.txt";
    report.artifacts.push_back(summary);
    report.artifacts.push_back(text);
    std::ofstream csv(summary, std::ios::binary);
    write_summary_csv(csv, report);
    std::ofstream txt(text, std::ios::binary);
    write_report_text(txt, config, report);
    if (!csv || !txt) throw std::runtime_error("cannot write reports in " + config.output_dir.string());
  }
  return report;
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "n,statistic,value,reference,tolerance,pass\n";
  for (const auto& row : report.rows) {
    out << row.n << ',' << row.statistic << ',' << format_double(row.value) << ','
        << format_double(row.reference) << ',' << format_double(row.tolerance) << ','
        << (row.pass ? (*row.pass ? "pass" : "fail") : "-") << '\n';
  }
}

void write_report_text(std::ostream& out, const ExperimentConfig& config,
                       const ExperimentReport& report) {
  out << "experiment " << experiment_name(report.experiment) << '\n';
  out << "law " << config.law.to_string() << '\n';
  out << "seed " << config.master_seed << '\n';
  out << "replicas " << config.replicas << '\n';
  out << "n";
  for (Index n : config.n_values) out << ' ' << n;
  out << '\n';
  if (report.experiment == ExperimentId::resolvent) {
    out << "z";
    for (const Complex& z : config.z_grid) out << ' ' << format_complex(z);
    out << '\n';
  }
  out << "remove_top " << config.remove_top << '\n';
  out << '\n';
  for (const auto& row : report.rows) {
    out << (row.pass ? (*row.pass ? "PASS" : "FAIL") : "INFO") << " n=" << row.n << ' '
        << row.statistic << " value=" << format_double(row.value)
        << " reference=" << format_double(row.reference)
        << " tolerance=" << format_double(row.tolerance) << " source=\"" << row.source << "\"\n";
  }
  out << '\n' << (report.passed() ? "overall PASS" : "overall FAIL") << '\n';
}

std::string render_scatter_svg(const std::vector<Complex>& points, double circle_radius,
                               double extent, std::string_view title) {
  constexpr double size = 1000.0;
  constexpr double margin = 50.0;
  const double scale = (size - 2.0 * margin) / (2.0 * extent);
  const double centre = size / 2.0;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" "
         "height=\"1000\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"white\"/>\n"
      << "<title>" << title << "</title>\n"
      << "<line x1=\"" << fixed2(margin) << "\" y1=\"500.00\" x2=\"" << fixed2(size - margin)
      << "\" y2=\"500.00\" stroke=\"#999999\" stroke-width=\"1\"/>\n"
      << "<line x1=\"500.00\" y1=\"" << fixed2(margin) << "\" x2=\"500.00\" y2=\""
      << fixed2(size - margin) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n"
      << "<circle cx=\"500.00\" cy=\"500.00\" r=\"" << fixed2(circle_radius * scale)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n"
      << "<g fill=\"#1f4e9c\">\n";
  for (const Complex& z : points) {
    if (std::abs(z.real()) > extent || std::abs(z.imag()) > extent) continue;
    svg << "<circle cx=\"" << fixed2(centre + z.real() * scale) << "\" cy=\""
        << fixed2(centre - z.imag() * scale) << "\" r=\"2.00\"/>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string render_histogram_svg(const std::vector<double>& values, int bins, double lo, double hi,
                                 const std::function<double(double)>& density,
                                 std::string_view title) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("render_histogram_svg: bad binning");
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double v : values) {
    if (v < lo || v >= hi) continue;
    const auto bin = std::min<std::size_t>(
        static_cast<std::size_t>((v - lo) / (hi - lo) * bins), static_cast<std::size_t>(bins - 1));
    counts[bin] += 1.0;
  }
  const double width = (hi - lo) / bins;
  const double total = values.empty() ? 1.0 : static_cast<double>(values.size());
  double peak = 0.0;
  for (double& c : counts) {
    c /= total * width;
    peak = std::max(peak, c);
  }
  constexpr int kCurvePoints = 200;
  for (int i = 0; i <= kCurvePoints; ++i) peak = std::max(peak, density(lo + (hi - lo) * i / kCurvePoints));
  if (peak <= 0.0) peak = 1.0;

  constexpr double left = 50.0;
  constexpr double right = 950.0;
  constexpr double bottom = 950.0;
  constexpr double top = 50.0;
  const double x_scale = (right - left) / (hi - lo);
  const double y_scale = (bottom - top) / (1.1 * peak);
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" "
         "height=\"1000\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"white\"/>\n"
      << "<title>" << title << "</title>\n"
      << "<line x1=\"50.00\" y1=\"950.00\" x2=\"950.00\" y2=\"950.00\" stroke=\"black\" "
         "stroke-width=\"1\"/>\n"
      << "<g fill=\"#9db7e0\" stroke=\"#1f4e9c\" stroke-width=\"1\">\n";
  for (int b = 0; b < bins; ++b) {
    const double height = counts[static_cast<std::size_t>(b)] * y_scale;
    svg << "<rect x=\"" << fixed2(left + b * width * x_scale) << "\" y=\""
        << fixed2(bottom - height) << "\" width=\"" << fixed2(width * x_scale) << "\" height=\""
        << fixed2(height) << "\"/>\n";
  }
  svg << "</g>\n<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
  for (int i = 0; i <= kCurvePoints; ++i) {
    const double t = lo + (hi - lo) * i / kCurvePoints;
    svg << (i ? " " : "") << fixed2(left + (t - lo) * x_scale) << ','
        << fixed2(bottom - density(t) * y_scale);
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace rmarkov
