#include "rmarkov/experiments.hpp"
#include "rmarkov/io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rmarkov {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string summary_of(const ExperimentReport& report) {
  std::ostringstream out;
  write_summary_csv(out, report);
  return out.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rmarkov_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(ExperimentId id) {
  ExperimentConfig config;
  config.experiment = id;
  config.n_values = {12, 24};
  config.replicas = 3;
  config.master_seed = 5;
  return config;
}

// Rough well-formedness: balanced tags and a single svg root.
void expect_svg_shape(const std::string& svg) {
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("viewBox=\"0 0 1000 1000\""), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '<'), std::count(svg.begin(), svg.end(), '>'));
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig config;
  EXPECT_NO_THROW(config.validate());
  EXPECT_EQ(config.n_values, (std::vector<Index>{100, 200, 400, 800}));
  EXPECT_EQ(config.remove_top, 1);
}

TEST(Config, ParsesEveryKey) {
  const auto config = parse_config(
      "# comment\n"
      "experiment = circular\n"
      "\n"
      "n = 10, 20,30\n"
      "law=bernoulli:p=0.5\n"
      "replicas=7\n"
      "seed=18446744073709551615\n"
      "z=0, 1+i, -2i\n"
      "out=/tmp/somewhere\n"
      "remove_top=0\n"
      "threads=4\n");
  EXPECT_EQ(config.experiment, ExperimentId::circular);
  EXPECT_EQ(config.n_values, (std::vector<Index>{10, 20, 30}));
  EXPECT_EQ(config.law, EntryLaw::bernoulli(0.5));
  EXPECT_EQ(config.replicas, 7);
  EXPECT_EQ(config.master_seed, 18446744073709551615ull);
  ASSERT_EQ(config.z_grid.size(), 3u);
  EXPECT_EQ(config.z_grid[1], Complex(1.0, 1.0));
  EXPECT_EQ(config.z_grid[2], Complex(0.0, -2.0));
  EXPECT_EQ(config.output_dir, std::filesystem::path("/tmp/somewhere"));
  EXPECT_EQ(config.remove_top, 0);
  EXPECT_EQ(config.threads, 4u);
}

TEST(Config, LaterSettingsOverrideEarlierOnes) {
  ExperimentConfig base;
  base.replicas = 9;
  const auto config = parse_config("replicas=2\nreplicas=3\n", base);
  EXPECT_EQ(config.replicas, 3);
  EXPECT_EQ(config.n_values, base.n_values);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("colour=blue\n"), ConfigError);
  EXPECT_THROW(parse_config("replicas\n"), ConfigError);
  EXPECT_THROW(parse_config("replicas=five\n"), ConfigError);
  EXPECT_THROW(parse_config("replicas=5x\n"), ConfigError);
  EXPECT_THROW(parse_config("n=10,,20\n"), ConfigError);
  EXPECT_THROW(parse_config("experiment=spiral\n"), ConfigError);
  EXPECT_THROW(parse_config("law=gamma\n"), ConfigError);
  EXPECT_THROW(parse_config("z=1+\n"), ConfigError);
  EXPECT_THROW(read_config_file("/nonexistent/config.txt"), ConfigError);
}

TEST(Config, ValidateRejectsBadValues) {
  auto expect_invalid = [](auto mutate) {
    ExperimentConfig config;
    mutate(config);
    EXPECT_THROW(config.validate(), ConfigError);
  };
  expect_invalid([](ExperimentConfig& c) { c.n_values.clear(); });
  expect_invalid([](ExperimentConfig& c) { c.n_values = {1, 10}; });
  expect_invalid([](ExperimentConfig& c) { c.replicas = 0; });
  expect_invalid([](ExperimentConfig& c) { c.z_grid.clear(); });
  expect_invalid([](ExperimentConfig& c) { c.n_values = {5}; c.remove_top = 5; });
  expect_invalid([](ExperimentConfig& c) { c.remove_top = -1; });
  expect_invalid([](ExperimentConfig& c) { c.threads = 0; });
}

TEST(Config, ReadsFile) {
  const auto dir = scratch_dir("config");
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "run.cfg");
    out << "experiment=moments\nn=50\n";
  }
  const auto config = read_config_file(dir / "run.cfg");
  EXPECT_EQ(config.experiment, ExperimentId::moments);
  EXPECT_EQ(config.n_values, (std::vector<Index>{50}));
  std::filesystem::remove_all(dir);
}

TEST(Experiments, NamesRoundTrip) {
  EXPECT_EQ(all_experiments().size(), 6u);
  for (ExperimentId id : all_experiments()) {
    EXPECT_EQ(parse_experiment(experiment_name(id)), id);
  }
  EXPECT_FALSE(parse_experiment("Quartercircle").has_value());
}

TEST(ReplicaStream, DistinctAcrossSizesAndReplicas) {
  auto a = replica_stream(1, 100, 0);
  auto b = replica_stream(1, 100, 1);
  auto c = replica_stream(1, 101, 0);
  auto a2 = replica_stream(1, 100, 0);
  const double va = a.next_uniform();
  EXPECT_NE(va, b.next_uniform());
  EXPECT_NE(va, c.next_uniform());
  EXPECT_EQ(va, a2.next_uniform());
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 3u, 8u, 64u}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(37, threads, [&](long i) { hits[static_cast<std::size_t>(i)]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1) << "threads=" << threads;
  }
  parallel_for(0, 4, [](long) { FAIL(); });
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  for (unsigned threads : {1u, 4u}) {
    try {
      parallel_for(20, threads, [](long i) {
        if (i % 7 == 3) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "index 3");
    }
  }
}

TEST(LoopMoment, MatchesDirectPowerOracle) {
  SeededStream stream(3, 0);
  const Eigen::MatrixXd m = to_markov(sample_iid_matrix(9, EntryLaw::exponential(), stream)).m_matrix;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(9, 9);
  for (int r = 1; r <= 4; ++r) {
    power = power * m;
    const double expected = std::pow(9.0, r / 2.0) * (power.trace() / 9.0 - 1.0 / 9.0);
    EXPECT_NEAR(loop_moment_statistic(m, r), expected, 1e-12) << "r=" << r;
  }
}

TEST(LoopMoment, ZeroPowerIsOneMinusInverseN) {
  // trace(M^0) = n, so the statistic is 1 - 1/n rather than 0.
  const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.25);
  EXPECT_DOUBLE_EQ(loop_moment_statistic(m, 0), 0.75);
}

TEST(LoopMoment, VanishesOnTheUniformChain) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(16, 16, 1.0 / 16.0);
  for (int r = 1; r <= 3; ++r) EXPECT_NEAR(loop_moment_statistic(m, r), 0.0, 1e-13);
}

TEST(Report, PassedIgnoresInformationalRows) {
  ExperimentReport report{ExperimentId::moments, {}, {}};
  report.rows.push_back({10, "a", 1.0, 0.0, 0.0, std::nullopt, "x"});
  EXPECT_TRUE(report.passed());
  report.rows.push_back({10, "b", 1.0, 0.0, 0.0, true, "x"});
  EXPECT_TRUE(report.passed());
  report.rows.push_back({20, "b", 1.0, 0.0, 0.0, false, "x"});
  EXPECT_FALSE(report.passed());
  ASSERT_NE(report.find(20, "b"), nullptr);
  EXPECT_EQ(report.find(20, "b")->pass, false);
  EXPECT_EQ(report.find(30, "b"), nullptr);
}

TEST(Report, SummaryCsvLayout) {
  ExperimentReport report{ExperimentId::moments, {}, {}};
  report.rows.push_back({10, "alpha", 0.5, 1.0, 0.25, true, "x"});
  report.rows.push_back({10, "beta", -2.0, 0.0, 0.0, false, "x"});
  report.rows.push_back({20, "gamma", 0.1, 0.0, 0.0, std::nullopt, "x"});
  EXPECT_EQ(summary_of(report),
            "n,statistic,value,reference,tolerance,pass\n"
            "10,alpha,0.5,1,0.25,pass\n"
            "10,beta,-2,0,0,fail\n"
            "20,gamma,0.1,0,0,-\n");
}

TEST(Smoke, EveryExperimentRunsAtSizeTwo) {
  for (ExperimentId id : all_experiments()) {
    ExperimentConfig config;
    config.experiment = id;
    config.n_values = {2};
    config.replicas = 2;
    const auto report = run_experiment(config);
    EXPECT_EQ(report.experiment, id);
    EXPECT_FALSE(report.rows.empty()) << experiment_name(id);
    for (const auto& row : report.rows) {
      EXPECT_FALSE(row.source.empty());
      EXPECT_FALSE(row.statistic.empty());
    }
  }
}

TEST(Smoke, HeavyTailNeedsFiniteVarianceExceptForResolventAndMoments) {
  auto config = small_config(ExperimentId::quartercircle);
  config.law = EntryLaw::heavy_tail(0.75);
  for (ExperimentId id : {ExperimentId::quartercircle, ExperimentId::circular,
                          ExperimentId::extremes, ExperimentId::perturbation}) {
    config.experiment = id;
    EXPECT_THROW(run_experiment(config), ConfigError) << experiment_name(id);
  }
  config.experiment = ExperimentId::resolvent;
  EXPECT_NO_THROW(run_experiment(config));
  config.experiment = ExperimentId::moments;
  EXPECT_NO_THROW(run_experiment(config));
}

class Determinism : public ::testing::TestWithParam<ExperimentId> {};

TEST_P(Determinism, SummaryIndependentOfThreadCount) {
  auto config = small_config(GetParam());
  config.replicas = 6;
  config.threads = 1;
  const std::string serial = summary_of(run_experiment(config));
  config.threads = 8;
  EXPECT_EQ(summary_of(run_experiment(config)), serial);
  config.threads = 3;
  EXPECT_EQ(summary_of(run_experiment(config)), serial);
}

INSTANTIATE_TEST_SUITE_P(AllExperiments, Determinism, ::testing::ValuesIn(all_experiments()),
                         [](const auto& info) { return std::string(experiment_name(info.param)); });

TEST(Determinism, SeedChangesTheOutput) {
  auto config = small_config(ExperimentId::quartercircle);
  const std::string a = summary_of(run_experiment(config));
  config.master_seed += 1;
  EXPECT_NE(summary_of(run_experiment(config)), a);
}

// Closed-form quartercircular CDF written out independently of the library.
double quartercircle_cdf_oracle(double t, double sigma) {
  if (t <= 0.0) return 0.0;
  if (t >= 2.0 * sigma) return 1.0;
  const double s2 = sigma * sigma;
  return (0.5 * t * std::sqrt(4.0 * s2 - t * t) + 2.0 * s2 * std::asin(t / (2.0 * sigma))) /
         (std::numbers::pi * s2);
}

double brute_force_ks(std::vector<double> atoms, double sigma) {
  std::sort(atoms.begin(), atoms.end());
  const double n = static_cast<double>(atoms.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double f = quartercircle_cdf_oracle(atoms[i], sigma);
    worst = std::max({worst, (i + 1) / n - f, f - i / n});
  }
  return worst;
}

TEST(Quartercircle, MedianDistanceMatchesIndependentRecomputation) {
  ExperimentConfig config;
  config.n_values = {40};
  config.replicas = 5;
  config.master_seed = 77;
  config.law = EntryLaw::uniform();
  const auto report = run_quartercircle(config);
  const double sigma = config.law.effective_radius();

  std::vector<double> distances;
  for (long r = 0; r < config.replicas; ++r) {
    auto stream = replica_stream(config.master_seed, 40, r);
    const Eigen::MatrixXd m = to_markov(sample_iid_matrix(40, config.law, stream)).m_matrix;
    const Eigen::VectorXd s = testing::reference_singular_values(Eigen::MatrixXd(std::sqrt(40.0) * m));
    std::vector<double> bulk(s.data() + 1, s.data() + s.size());
    distances.push_back(brute_force_ks(bulk, sigma));
  }
  std::sort(distances.begin(), distances.end());
  const auto* row = report.find(40, "ks_median");
  ASSERT_NE(row, nullptr);
  EXPECT_NEAR(row->value, distances[2], 1e-9);
  EXPECT_FALSE(row->pass.has_value());
}

TEST(Quartercircle, DeskScaleRowsAreAsserted) {
  ExperimentConfig config;
  config.n_values = {400};
  config.replicas = 2;
  const auto report = run_quartercircle(config);
  EXPECT_TRUE(report.passed());
  for (const char* name : {"ks_median", "second_moment_mean", "bulk_second_moment_mean"}) {
    const auto* row = report.find(400, name);
    ASSERT_NE(row, nullptr) << name;
    EXPECT_EQ(row->pass, true) << name;
  }
  EXPECT_NEAR(report.find(400, "second_moment_mean")->reference, 2.0, 1e-15);
}

TEST(Circular, ConjugateDefectAssertedAtEveryN) {
  const auto report = run_circular(small_config(ExperimentId::circular));
  for (Index n : {12, 24}) {
    const auto* row = report.find(n, "conjugate_defect_max");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->pass, true);
    EXPECT_LE(row->value, 1e-8);
  }
}

TEST(Extremes, PerronValueAtEveryReplica) {
  auto config = small_config(ExperimentId::extremes);
  config.law = EntryLaw::bernoulli(0.3);
  const auto report = run_extremes(config);
  for (Index n : {12, 24}) {
    const auto* row = report.find(n, "lambda1_error_max");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->pass, true);
  }
}

TEST(Resolvent, RowsPerShiftAndExponent) {
  auto config = small_config(ExperimentId::resolvent);
  config.z_grid = {0.0, Complex(0.5, 0.5), 4.0};
  const auto report = run_resolvent_bound(config);
  EXPECT_TRUE(report.passed());
  for (Index n : {12, 24}) {
    for (const char* name : {"min_sn[z=0+0i]", "min_sn[z=0.5+0.5i]", "min_sn[z=4+0i]"}) {
      const auto* row = report.find(n, name);
      ASSERT_NE(row, nullptr) << name;
      EXPECT_GT(row->value, 0.0);
      EXPECT_EQ(row->pass, true);
    }
  }
  // Only |z| beyond the support edge gets the floor row, at the largest n.
  EXPECT_NE(report.find(24, "min_sn_away_from_support[z=4+0i]"), nullptr);
  EXPECT_EQ(report.find(24, "min_sn_away_from_support[z=0+0i]"), nullptr);
  EXPECT_EQ(report.find(12, "min_sn_away_from_support[z=4+0i]"), nullptr);
  const auto* b_hat = report.find(24, "b_hat[z=0+0i]");
  ASSERT_NE(b_hat, nullptr);
  EXPECT_EQ(b_hat->reference, 6.0);
  EXPECT_NE(report.find(24, "log_log_slope[z=0+0i]"), nullptr);
}

TEST(Resolvent, ExponentIsTheTightestEnvelope) {
  auto config = small_config(ExperimentId::resolvent);
  config.z_grid = {Complex(1.0, 0.25)};
  const auto report = run_resolvent_bound(config);
  double b = -1e300;
  for (Index n : {12, 24}) {
    const double s = report.find(n, "min_sn[z=1+0.25i]")->value;
    b = std::max(b, -std::log(s) / std::log(static_cast<double>(n)));
  }
  EXPECT_NEAR(report.find(24, "b_hat[z=1+0.25i]")->value, b, 1e-12);
}

TEST(Perturbation, ReportsBothStatistics) {
  const auto report = run_perturbation_gap(small_config(ExperimentId::perturbation));
  for (Index n : {12, 24}) {
    EXPECT_NE(report.find(n, "log_singular_gap_median"), nullptr);
    EXPECT_NE(report.find(n, "row_normalizer_deviation_median"), nullptr);
  }
  EXPECT_NE(report.find(24, "log_singular_gap_strictly_decreasing"), nullptr);
}

TEST(Moments, RowsAndReducibleCount) {
  const auto report = run_moments_and_invariant(small_config(ExperimentId::moments));
  for (Index n : {12, 24}) {
    for (int r = 1; r <= 3; ++r) {
      EXPECT_NE(report.find(n, "loop_statistic_abs_median[r=" + std::to_string(r) + "]"), nullptr);
    }
    const auto* reducible = report.find(n, "reducible_count");
    ASSERT_NE(reducible, nullptr);
    EXPECT_EQ(reducible->value, 0.0);
  }
}

TEST(Moments, SparseBernoulliCountsReducibleChains) {
  ExperimentConfig config = small_config(ExperimentId::moments);
  config.n_values = {6};
  config.replicas = 40;
  config.law = EntryLaw::bernoulli(0.15);
  const auto report = run_moments_and_invariant(config);
  EXPECT_GT(report.find(6, "reducible_count")->value, 0.0);
}

TEST(Artifacts, FilesWrittenWithExpectedLayout) {
  const auto dir = scratch_dir("artifacts");
  auto config = small_config(ExperimentId::circular);
  config.output_dir = dir;
  const auto report = run_experiment(config);
  for (const char* name : {"summary.csv", "report.txt", "figure_12.svg", "figure_24.svg",
                           "spectrum_12_0.csv", "spectrum_24_2.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    EXPECT_NE(std::find(report.artifacts.begin(), report.artifacts.end(), dir / name),
              report.artifacts.end())
        << name;
  }
  EXPECT_EQ(slurp(dir / "summary.csv"), summary_of(report));
  EXPECT_EQ(slurp(dir / "spectrum_12_0.csv").rfind("index,re,im\n1,", 0), 0u);
  expect_svg_shape(slurp(dir / "figure_24.svg"));
  const std::string text = slurp(dir / "report.txt");
  EXPECT_NE(text.find("experiment circular"), std::string::npos);
  EXPECT_NE(text.find("overall "), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Artifacts, QuartercircleSpectraAreReal) {
  const auto dir = scratch_dir("qc");
  auto config = small_config(ExperimentId::quartercircle);
  config.output_dir = dir;
  run_experiment(config);
  EXPECT_EQ(slurp(dir / "spectrum_24_1.csv").rfind("index,value\n1,", 0), 0u);
  expect_svg_shape(slurp(dir / "figure_12.svg"));
  std::filesystem::remove_all(dir);
}

TEST(Svg, ScatterIsDeterministicAndClipped) {
  const std::vector<Complex> points = {{0.0, 0.0}, {0.5, -0.5}, {5.0, 0.0}};
  const std::string svg = render_scatter_svg(points, 1.0, 1.5, "t");
  expect_svg_shape(svg);
  EXPECT_EQ(svg, render_scatter_svg(points, 1.0, 1.5, "t"));
  // Two points plus the reference circle.
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) {
    ++circles;
  }
  EXPECT_EQ(circles, 3u);
  EXPECT_NE(svg.find("cx=\"500.00\" cy=\"500.00\" r=\"300.00\""), std::string::npos);
  EXPECT_NE(svg.find("cx=\"650.00\" cy=\"650.00\""), std::string::npos);
}

TEST(Svg, HistogramBarsAndCurve) {
  const std::string svg = render_histogram_svg({0.1, 0.2, 0.6, 5.0}, 4, 0.0, 1.0,
                                               [](double) { return 1.0; }, "h");
  expect_svg_shape(svg);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_THROW(render_histogram_svg({}, 0, 0.0, 1.0, [](double) { return 0.0; }, "h"),
               std::invalid_argument);
  EXPECT_THROW(render_histogram_svg({}, 3, 1.0, 1.0, [](double) { return 0.0; }, "h"),
               std::invalid_argument);
}

}  // namespace
}  // namespace rmarkov
