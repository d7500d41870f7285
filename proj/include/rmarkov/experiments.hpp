#pragma once

// Seeded Monte Carlo experiments on sqrt(n) M with CSV, text and SVG output.

#include "rmarkov/ensembles.hpp"
#include "rmarkov/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmarkov {

enum class ExperimentId { quartercircle, circular, extremes, resolvent, perturbation, moments };

std::string_view experiment_name(ExperimentId id);
std::optional<ExperimentId> parse_experiment(std::string_view name);
const std::vector<ExperimentId>& all_experiments();

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::quartercircle;
  std::vector<Index> n_values = {100, 200, 400, 800};
  EntryLaw law = EntryLaw::exponential();
  long replicas = 5;
  std::uint64_t master_seed = 42;
  std::vector<Complex> z_grid = {0.0, 1.0, Complex(1.0, 1.0), 2.0, 3.0};
  /// No files are written when empty.
  std::filesystem::path output_dir;
  Index remove_top = 1;
  unsigned threads = 1;

  /// Throws ConfigError on an empty n grid, n < 2, replicas < 1, an empty z
  /// grid, remove_top outside [0, min n - 1] or threads == 0.
  void validate() const;
};

/// Applies one key=value setting (keys: experiment, n, law, replicas, seed,
/// z, out, remove_top, threads). Lists are comma separated.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat key=value text; blank lines and lines starting with '#' are skipped.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig read_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

/// One summary line. pass is empty for informational rows.
struct SummaryRow {
  Index n;
  std::string statistic;
  double value;
  double reference;
  double tolerance;
  std::optional<bool> pass;
  std::string source;
};

struct ExperimentReport {
  ExperimentId experiment;
  std::vector<SummaryRow> rows;
  std::vector<std::filesystem::path> artifacts;

  bool passed() const;
  const SummaryRow* find(Index n, std::string_view statistic) const;
};

/// Stream of replica r at size n: SeededStream(master_seed, (n << 32) | r).
SeededStream replica_stream(std::uint64_t master_seed, Index n, long replica);

/// Runs body(0..count-1) on up to `threads` workers. Results must be stored
/// by index; exceptions are rethrown after all workers stop.
void parallel_for(long count, unsigned threads, const std::function<void(long)>& body);

/// n^{r/2} ((1/n) trace(M^r) - 1/n).
double loop_moment_statistic(const Eigen::MatrixXd& m_matrix, int r);

/// Absolute tolerances apply at the largest n of the grid, and only when it
/// is at least this large; smaller grids get informational rows. The loop
/// moment trend is asserted only on grids whose consecutive sizes grow by a
/// factor of at least 4.
inline constexpr Index kDeskScaleN = 400;

ExperimentReport run_quartercircle(const ExperimentConfig& config);
ExperimentReport run_circular(const ExperimentConfig& config);
ExperimentReport run_extremes(const ExperimentConfig& config);
ExperimentReport run_resolvent_bound(const ExperimentConfig& config);
ExperimentReport run_perturbation_gap(const ExperimentConfig& config);
ExperimentReport run_moments_and_invariant(const ExperimentConfig& config);

/// Dispatches on config.experiment, then writes report.txt and summary.csv
/// when an output directory is set.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Columns n,statistic,value,reference,tolerance,pass; pass is "pass",
/// "fail" or "-".
void write_summary_csv(std::ostream& out, const ExperimentReport& report);
void write_report_text(std::ostream& out, const ExperimentConfig& config,
                       const ExperimentReport& report);

/// Eigenvalue scatter on [-extent, extent]^2 with a reference circle.
std::string render_scatter_svg(const std::vector<Complex>& points, double circle_radius,
                               double extent, std::string_view title);

/// Normalized histogram of values with an overlaid density curve.
std::string render_histogram_svg(const std::vector<double>& values, int bins, double lo, double hi,
                                 const std::function<double(double)>& density,
                                 std::string_view title);

}  // namespace rmarkov
