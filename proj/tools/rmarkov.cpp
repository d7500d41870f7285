// Command line entry point: sample, svd, eig, check lemmas, experiment, version.

#include "rmarkov/ensembles.hpp"
#include "rmarkov/experiments.hpp"
#include "rmarkov/inequality_oracles.hpp"
#include "rmarkov/io.hpp"
#include "rmarkov/linalg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr const char* kVersion = "rmarkov 1.0.0";

rmarkov::ParsedMatrix load_matrix(const std::string& path) {
  if (path == "-") return rmarkov::read_matrix(std::cin);
  return rmarkov::read_matrix_file(path);
}

struct ExperimentFlags {
  std::string id;
  std::string config_file;
  std::optional<std::string> n;
  std::optional<std::string> law;
  std::optional<std::string> replicas;
  std::optional<std::string> seed;
  std::optional<std::string> z;
  std::optional<std::string> out;
  std::optional<std::string> remove_top;
  std::optional<std::string> threads;
};

rmarkov::ExperimentConfig build_config(const ExperimentFlags& flags) {
  rmarkov::ExperimentConfig config;
  if (!flags.config_file.empty()) config = rmarkov::read_config_file(flags.config_file);
  // Flags override the file.
  rmarkov::apply_setting(config, "experiment", flags.id);
  const std::pair<const char*, const std::optional<std::string>*> overrides[] = {
      {"n", &flags.n},         {"law", &flags.law}, {"replicas", &flags.replicas},
      {"seed", &flags.seed},   {"z", &flags.z},     {"out", &flags.out},
      {"remove_top", &flags.remove_top}, {"threads", &flags.threads}};
  for (const auto& [key, value] : overrides) {
    if (*value) rmarkov::apply_setting(config, key, **value);
  }
  config.validate();
  return config;
}

int run_experiment_command(const ExperimentFlags& flags) {
  const rmarkov::ExperimentConfig config = build_config(flags);
  const rmarkov::ExperimentReport report = rmarkov::run_experiment(config);
  rmarkov::write_report_text(std::cout, config, report);
  return report.passed() ? kExitPass : kExitFail;
}

int run_check_command(const std::string& lemma, long instances, std::uint64_t seed) {
  std::vector<rmarkov::Lemma> lemmas;
  if (lemma.empty() || lemma == "all") {
    lemmas = rmarkov::fuzzable_lemmas();
    lemmas.push_back(rmarkov::Lemma::concdist);
  } else {
    const auto parsed = rmarkov::parse_lemma(lemma);
    if (!parsed) throw CLI::ValidationError("--lemma", "unknown lemma '" + lemma + "'");
    lemmas.push_back(*parsed);
  }
  bool all_passed = true;
  for (rmarkov::Lemma l : lemmas) {
    const rmarkov::CheckReport report = rmarkov::fuzz_lemma(l, instances, seed);
    std::cout << report.summary_line() << '\n';
    all_passed = all_passed && report.passed;
  }
  return all_passed ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random Markov matrix spectra: sampling, kernels, inequality checks, experiments"};
  app.require_subcommand(1);

  int exit_code = kExitPass;

  auto* sample = app.add_subcommand("sample", "Print a sampled matrix X or M = DX");
  long sample_n = 5;
  std::string sample_law = "exponential:rate=1";
  std::uint64_t sample_seed = 42;
  std::uint64_t sample_index = 0;
  bool raw = false;
  sample->add_option("--n", sample_n, "Dimension")->check(CLI::PositiveNumber);
  sample->add_option("--law", sample_law, "Entry law, e.g. bernoulli:p=0.5");
  sample->add_option("--seed", sample_seed, "Master seed");
  sample->add_option("--stream", sample_index, "Stream index");
  sample->add_flag("--raw", raw, "Print X instead of M");
  sample->callback([&] {
    rmarkov::SeededStream stream(sample_seed, sample_index);
    const auto law = rmarkov::EntryLaw::parse(sample_law);
    const Eigen::MatrixXd x = rmarkov::sample_iid_matrix(sample_n, law, stream);
    rmarkov::write_matrix(std::cout, raw ? x : rmarkov::to_markov(x).m_matrix);
  });

  auto* svd = app.add_subcommand("svd", "Singular values of a matrix file, descending");
  std::string svd_path = "-";
  svd->add_option("input", svd_path, "Matrix file, '-' for stdin");
  svd->callback([&] {
    const auto parsed = load_matrix(svd_path);
    const Eigen::VectorXd s = parsed.is_complex ? rmarkov::singular_values(parsed.entries)
                                                : rmarkov::singular_values(parsed.real());
    for (Eigen::Index i = 0; i < s.size(); ++i) std::cout << rmarkov::format_double(s(i)) << '\n';
  });

  auto* eig = app.add_subcommand("eig", "Eigenvalues of a matrix file, by decreasing modulus");
  std::string eig_path = "-";
  eig->add_option("input", eig_path, "Matrix file, '-' for stdin");
  eig->callback([&] {
    const auto parsed = load_matrix(eig_path);
    if (parsed.entries.rows() != parsed.entries.cols()) {
      throw CLI::ValidationError("input", "eigenvalues need a square matrix");
    }
    const Eigen::VectorXcd lambda = parsed.is_complex ? rmarkov::eigenvalues(parsed.entries)
                                                      : rmarkov::eigenvalues(parsed.real());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      std::cout << rmarkov::format_complex(lambda(i)) << '\n';
    }
  });

  auto* check = app.add_subcommand("check", "Inequality oracles");
  auto* lemmas = check->add_subcommand("lemmas", "Fuzz the inequality checks");
  check->require_subcommand(1);
  std::string lemma;
  long instances = 500;
  std::uint64_t check_seed = 1;
  lemmas->add_option("--lemma", lemma, "basic, rvdist, tvneg, cauchy, thompson, weyl, A, concdist");
  lemmas->add_option("--instances", instances, "Instances per size")->check(CLI::PositiveNumber);
  lemmas->add_option("--seed", check_seed, "Master seed");
  lemmas->callback([&] { exit_code = run_check_command(lemma, instances, check_seed); });

  auto* experiment = app.add_subcommand("experiment", "Seeded Monte Carlo experiment");
  ExperimentFlags flags;
  experiment->add_option("id", flags.id,
                         "quartercircle, circular, extremes, resolvent, perturbation, moments")
      ->required();
  experiment->add_option("--config", flags.config_file, "key=value config file");
  experiment->add_option("--n", flags.n, "Comma separated sizes");
  experiment->add_option("--law", flags.law, "Entry law");
  experiment->add_option("--replicas", flags.replicas, "Replicas per size");
  experiment->add_option("--seed", flags.seed, "Master seed");
  experiment->add_option("--z", flags.z, "Comma separated shifts");
  experiment->add_option("--out", flags.out, "Output directory");
  experiment->add_option("--remove-top", flags.remove_top, "Outliers removed from the bulk");
  experiment->add_option("--threads", flags.threads, "Worker threads");
  experiment->callback([&] { exit_code = run_experiment_command(flags); });

  auto* version = app.add_subcommand("version", "Print the version");
  version->callback([] { std::cout << kVersion << '\n'; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const rmarkov::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return exit_code;
}
