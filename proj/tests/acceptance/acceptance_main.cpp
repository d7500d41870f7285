// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rmarkov/ensembles.hpp"
#include "rmarkov/experiments.hpp"
#include "rmarkov/inequality_oracles.hpp"
#include "rmarkov/io.hpp"
#include "rmarkov/linalg.hpp"
#include "rmarkov/spectral_statistics.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rmarkov;

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require_row(Outcome& outcome, const ExperimentReport& report, Index n,
                 const std::string& statistic) {
  const SummaryRow* row = report.find(n, statistic);
  if (row == nullptr) {
    outcome.require(false, "missing row " + statistic + " at n=" + std::to_string(n));
    return;
  }
  outcome.require(row->pass.value_or(false),
                  statistic + " at n=" + std::to_string(n) + " value=" + num(row->value));
}

Eigen::MatrixXd gaussian(Index n, SeededStream& stream) {
  Eigen::MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = stream.next_gaussian();
  return a;
}

Outcome check_lemma_suite() {
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  long instances = 0;
  for (Lemma lemma : fuzzable_lemmas()) {
    const CheckReport report = fuzz_lemma(lemma, 500, 2024, 3, 12);
    instances += report.instances;
    outcome.require(report.passed, report.summary_line());
    outcome.require(report.instances >= 5000, std::string(lemma_name(lemma)) + " instance count");
  }
  const double elapsed = seconds_since(start);
  outcome.require(elapsed <= 60.0, "runtime " + num(elapsed) + " s");
  outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::to_string(instances) +
                    " instances in " + num(elapsed) + " s";
  return outcome;
}

Outcome check_special_matrix_closed_forms() {
  Outcome outcome;
  for (Index n : {Index{2}, Index{10}, Index{100}, Index{10000}}) {
    for (Complex z : {Complex(0.0), Complex(1.0), Complex(1.0, 1.0), Complex(3.0)}) {
      const CheckReport report = check_special_matrix_A(n, z);
      outcome.require(report.passed, report.summary_line());
    }
  }
  // Independent quadratic for s_n(A_{1/sqrt(n)}) and the golden-ratio limit.
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  outcome.require(std::abs(special_matrix_limit(1.0) - golden) <= 1e-12, "limit at z=1");
  for (Index n : {Index{100}, Index{10000}}) {
    const double w = 1.0 / std::sqrt(static_cast<double>(n));
    const double c = (1.0 - w) * (1.0 - w);
    const double b = 1.0 + static_cast<double>(n - 1) * w * w + c;
    const double smaller = 2.0 * c / (b + std::sqrt(b * b - 4.0 * c));
    const double s_n = std::sqrt(smaller);
    outcome.require(std::abs(s_n - 0.618034) <= 2.0 / std::sqrt(static_cast<double>(n)),
                    "s_n at n=" + std::to_string(n) + " is " + num(s_n));
    if (n <= 100) {
      const Eigen::MatrixXcd a = special_matrix(n, w);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
      outcome.require(std::abs(svd.singularValues()(n - 1) - s_n) <= 1e-8, "dense s_n");
    }
    if (outcome.passed && n == 10000) outcome.detail = "16 (n, z) cases; s_n at n=10^4 is " + num(s_n);
  }
  return outcome;
}

Outcome check_girko_identity() {
  Outcome outcome;
  std::vector<Complex> grid;
  for (double re : {-1.0, -0.5, 0.0, 0.5, 1.0})
    for (double im : {-1.0, -0.5, 0.0, 0.5, 1.0}) grid.emplace_back(re + 0.013, im + 0.007);
  double worst = 0.0;
  SeededStream stream(31, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd a = gaussian(20, stream);
    for (const Complex& z : grid) worst = std::max(worst, girko_identity_residual(a, z));
  }
  SeededStream markov_stream(31, 1);
  const Eigen::MatrixXd m =
      to_markov(sample_iid_matrix(200, EntryLaw::exponential(), markov_stream)).m_matrix;
  const Eigen::MatrixXd scaled = std::sqrt(200.0) * m;
  for (const Complex& z : grid) worst = std::max(worst, girko_identity_residual(scaled, z));
  outcome.require(worst <= 1e-6, "worst residual " + num(worst));
  outcome.detail += (outcome.detail.empty() ? "worst residual " + num(worst) : "");
  return outcome;
}

Outcome check_extremes() {
  Outcome outcome;
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  config.experiment = ExperimentId::extremes;
  config.n_values = {1000};
  config.master_seed = 42;
  config.replicas = 5;
  const ExperimentReport report = run_extremes(config);
  for (const char* statistic : {"lambda1_error_max", "spectral_radius_excess_max",
                                "s1_deviation_max", "s2_deviation_max", "lambda2_max"}) {
    require_row(outcome, report, 1000, statistic);
  }
  // Absolute thresholds restated with sigma / m = 1.
  outcome.require(report.find(1000, "s1_deviation_max")->value <= 0.05, "s1 threshold");
  outcome.require(report.find(1000, "s2_deviation_max")->value <= 0.25, "s2 threshold");
  outcome.require(report.find(1000, "lambda2_max")->value <= 2.3, "lambda2 threshold");

  // Perron value on every M sampled by the other desk-scale runs.
  ExperimentConfig small = config;
  small.n_values = {2, 5, 50, 200};
  small.replicas = 10;
  for (const EntryLaw& law : {EntryLaw::exponential(), EntryLaw::bernoulli(0.5),
                              EntryLaw::uniform(), EntryLaw::shifted_uniform(1.0, 2.0)}) {
    small.law = law;
    const ExperimentReport r = run_extremes(small);
    for (Index n : small.n_values) require_row(outcome, r, n, "lambda1_error_max");
  }
  const double elapsed = seconds_since(start);
  outcome.require(elapsed <= 600.0, "runtime " + num(elapsed) + " s");
  if (outcome.passed) outcome.detail = "runtime " + num(elapsed) + " s";
  return outcome;
}

ExperimentConfig bulk_config(const EntryLaw& law) {
  ExperimentConfig config;
  config.experiment = ExperimentId::quartercircle;
  config.n_values = {100, 400, 800};
  config.law = law;
  config.master_seed = 42;
  config.replicas = 5;
  return config;
}

Outcome check_singular_bulk() {
  Outcome outcome;
  for (const EntryLaw& law : {EntryLaw::exponential(), EntryLaw::bernoulli(0.5)}) {
    const ExperimentReport report = run_quartercircle(bulk_config(law));
    require_row(outcome, report, 800, "ks_median");
    require_row(outcome, report, 800, "ks_median_strictly_decreasing");
    outcome.require(report.find(800, "ks_median")->value <= 0.06, law.to_string() + " threshold");
    if (outcome.passed) {
      outcome.detail += law.to_string() + " ks=" + num(report.find(800, "ks_median")->value) + " ";
    }
  }
  return outcome;
}

Outcome check_eigenvalue_bulk(const std::filesystem::path& scratch) {
  Outcome outcome;
  ExperimentConfig config;
  config.experiment = ExperimentId::circular;
  config.n_values = {800};
  config.master_seed = 42;
  const ExperimentReport report = run_circular(config);
  require_row(outcome, report, 800, "radial_ks_median");
  require_row(outcome, report, 800, "conjugate_defect_max");
  outcome.require(report.find(800, "radial_ks_median")->value <= 0.06, "radial threshold");
  outcome.require(report.find(800, "conjugate_defect_max")->value <= 1e-8, "defect threshold");

  ExperimentConfig figure;
  figure.experiment = ExperimentId::circular;
  figure.n_values = {250};
  figure.law = EntryLaw::bernoulli(0.5);
  figure.replicas = 10;
  figure.output_dir = scratch / "figure";
  const ExperimentReport drawn = run_experiment(figure);
  require_row(outcome, drawn, 250, "conjugate_defect_max");
  const std::string svg = slurp(figure.output_dir / "figure_250.svg");
  outcome.require(svg.find("viewBox=\"0 0 1000 1000\"") != std::string::npos, "svg viewBox");
  // Unit reference circle: radius 1 maps to 300 px on the [-1.5, 1.5] canvas.
  outcome.require(svg.find("r=\"300.00\" fill=\"none\"") != std::string::npos, "unit circle");
  std::size_t dots = 0;
  for (auto pos = svg.find("r=\"2.00\""); pos != std::string::npos; pos = svg.find("r=\"2.00\"", pos + 1)) {
    ++dots;
  }
  // 10 replicas of 249 bulk eigenvalues, a few of which may fall off the canvas.
  outcome.require(dots >= 2400 && dots <= 2490, "scatter has " + std::to_string(dots) + " points");
  if (outcome.passed) {
    outcome.detail = "radial ks=" + num(report.find(800, "radial_ks_median")->value) +
                     ", figure " + (figure.output_dir / "figure_250.svg").string();
  }
  return outcome;
}

Outcome check_smallest_singular_value() {
  Outcome outcome;
  ExperimentConfig config;
  config.experiment = ExperimentId::resolvent;
  config.n_values = {100, 200, 400, 800};
  config.replicas = 20;
  config.master_seed = 42;
  const ExperimentReport report = run_resolvent_bound(config);
  for (const Complex& z : config.z_grid) {
    outcome.require(std::abs(z) <= 3.0, "grid point beyond 3");
    const std::string label = "[z=" + format_complex(z) + "]";
    for (Index n : config.n_values) require_row(outcome, report, n, "min_sn" + label);
    require_row(outcome, report, 800, "b_hat" + label);
  }
  const SummaryRow* away = report.find(800, "min_sn_away_from_support[z=3+0i]");
  outcome.require(away != nullptr && away->pass.value_or(false) && away->value >= 0.7,
                  "floor at |z| = 3");
  if (outcome.passed && away) outcome.detail = "min s_n at z=3: " + num(away->value);
  return outcome;
}

Outcome check_second_moment() {
  Outcome outcome;
  ExperimentConfig config;
  config.n_values = {500};
  config.master_seed = 42;
  const ExperimentReport report = run_quartercircle(config);
  require_row(outcome, report, 500, "second_moment_mean");
  require_row(outcome, report, 500, "bulk_second_moment_mean");
  const auto* full = report.find(500, "second_moment_mean");
  const auto* bulk = report.find(500, "bulk_second_moment_mean");
  outcome.require(std::abs(full->value - 2.0) <= 0.15, "full moment threshold");
  outcome.require(std::abs(bulk->value - 1.0) <= 0.1, "bulk moment threshold");
  if (outcome.passed) outcome.detail = "mean s^2=" + num(full->value) + " bulk=" + num(bulk->value);
  return outcome;
}

Outcome check_kernel_properties() {
  Outcome outcome;
  SeededStream stream(9, 0);
  double worst = 0.0;
  for (int instance = 0; instance < 1000; ++instance) {
    const Index n = 3 + instance % 10;
    SeededStream local = stream.substream(static_cast<std::uint64_t>(instance));
    const Eigen::MatrixXd a = gaussian(n, local);
    const Eigen::VectorXcd lambda = eigenvalues(a);
    const Eigen::VectorXd s = singular_values(a);
    const double scale = s(0);
    auto track = [&](double err, double ref) { worst = std::max(worst, err / std::max(ref, 1.0)); };

    Eigen::MatrixXd power = a;
    for (int k = 1; k <= 3; ++k) {
      track(std::abs(power.trace() - lambda.array().pow(k).sum().real()), std::pow(scale, k));
      track(std::abs(lambda.array().pow(k).sum().imag()), std::pow(scale, k));
      power = power * a;
    }
    track(std::abs(s.squaredNorm() - a.squaredNorm()), scale * scale);
    const double log_det_s = s.array().log().sum();
    const double log_det_lambda = lambda.array().abs().log().sum();
    track(std::abs(log_det_s - log_det_lambda), static_cast<double>(n));
    track((singular_values(Eigen::MatrixXd(a.transpose())) - s).cwiseAbs().maxCoeff(), scale);
    const double c = -2.5 + local.next_uniform();
    track((singular_values(Eigen::MatrixXd(c * a)) - std::abs(c) * s).cwiseAbs().maxCoeff(),
          std::abs(c) * scale);
    track((eigenvalues(Eigen::MatrixXd(a.transpose())) - lambda).cwiseAbs().maxCoeff(), scale);
  }
  outcome.require(worst <= 1e-8, "worst relative error " + num(worst));
  if (outcome.passed) outcome.detail = "1000 instances, worst relative error " + num(worst);
  return outcome;
}

Outcome check_thread_determinism(const std::filesystem::path& scratch) {
  Outcome outcome;
  ExperimentConfig config = bulk_config(EntryLaw::exponential());
  config.threads = 1;
  config.output_dir = scratch / "threads_1";
  run_experiment(config);
  config.threads = 8;
  config.output_dir = scratch / "threads_8";
  run_experiment(config);
  const std::string serial = slurp(scratch / "threads_1" / "summary.csv");
  const std::string parallel = slurp(scratch / "threads_8" / "summary.csv");
  outcome.require(!serial.empty(), "empty summary");
  outcome.require(serial == parallel, "summary.csv differs between 1 and 8 threads");
  if (outcome.passed) outcome.detail = std::to_string(serial.size()) + " identical bytes";
  return outcome;
}

}  // namespace

int main() {
  const auto scratch = std::filesystem::temp_directory_path() / "rmarkov_acceptance";
  std::filesystem::remove_all(scratch);
  std::filesystem::create_directories(scratch);

  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"lemma oracle suite", check_lemma_suite},
      {"special matrix closed forms", check_special_matrix_closed_forms},
      {"log potential identity", check_girko_identity},
      {"extreme eigenvalues and singular values", check_extremes},
      {"singular value bulk", check_singular_bulk},
      {"eigenvalue bulk and scatter figure", [&] { return check_eigenvalue_bulk(scratch); }},
      {"smallest singular value", check_smallest_singular_value},
      {"second moment", check_second_moment},
      {"kernel properties", check_kernel_properties},
      {"thread determinism", [&] { return check_thread_determinism(scratch); }},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    all = all && outcome.passed;
    std::cout << "criterion " << (i + 1) << ' ' << (outcome.passed ? "PASS" : "FAIL") << ' '
              << criteria[i].name << " (" << num(seconds_since(start)) << " s): " << outcome.detail
              << std::endl;
  }
  std::cout << (all ? "acceptance PASS" : "acceptance FAIL") << std::endl;
  return all ? 0 : 1;
}
