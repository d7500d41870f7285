#include "rmarkov/ensembles.hpp"
#include "rmarkov/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rmarkov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::map<std::string, double> parse_parameters(std::string_view text, std::string_view full) {
  std::map<std::string, double> params;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("law parameter without '=' in '" + std::string(full) + "'");
    }
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw std::invalid_argument("bad value for '" + key + "' in law '" + std::string(full) + "'");
    }
    if (!params.emplace(key, parsed).second) {
      throw std::invalid_argument("duplicate parameter '" + key + "' in law '" + std::string(full) + "'");
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return params;
}

double take(std::map<std::string, double>& params, const std::string& key, std::string_view full) {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument("law '" + std::string(full) + "' is missing parameter '" + key + "'");
  }
  const double value = it->second;
  params.erase(it);
  return value;
}

}  // namespace

EntryLaw EntryLaw::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("exponential law needs a finite rate > 0");
  }
  return {LawFamily::exponential, rate, 0.0};
}

EntryLaw EntryLaw::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli law needs p in (0, 1)");
  return {LawFamily::bernoulli, p, 0.0};
}

EntryLaw EntryLaw::uniform() { return {LawFamily::uniform, 0.0, 1.0}; }

EntryLaw EntryLaw::heavy_tail(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("heavy_tail law needs a finite beta > 0");
  }
  return {LawFamily::heavy_tail, beta, 0.0};
}

EntryLaw EntryLaw::shifted_uniform(double a, double b) {
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b)) {
    throw std::invalid_argument("shifted_uniform law needs 0 <= a < b");
  }
  return {LawFamily::shifted_uniform, a, b};
}

EntryLaw EntryLaw::parse(std::string_view text) {
  const std::string full = trim(text);
  const auto colon = full.find(':');
  const std::string name = full.substr(0, colon);
  auto params = colon == std::string::npos
                    ? std::map<std::string, double>{}
                    : parse_parameters(std::string_view(full).substr(colon + 1), full);
  EntryLaw law = EntryLaw::uniform();
  if (name == "exponential") {
    law = exponential(params.count("rate") ? take(params, "rate", full) : 1.0);
  } else if (name == "bernoulli") {
    law = bernoulli(take(params, "p", full));
  } else if (name == "uniform") {
    law = uniform();
  } else if (name == "heavytail") {
    law = heavy_tail(take(params, "beta", full));
  } else if (name == "shifteduniform") {
    const double a = take(params, "a", full);
    const double b = take(params, "b", full);
    law = shifted_uniform(a, b);
  } else {
    throw std::invalid_argument("unknown law '" + name + "'");
  }
  if (!params.empty()) {
    throw std::invalid_argument("unexpected parameter '" + params.begin()->first + "' for law '" +
                                name + "'");
  }
  return law;
}

double EntryLaw::mean() const {
  switch (family_) {
    case LawFamily::exponential: return 1.0 / p1_;
    case LawFamily::bernoulli: return p1_;
    case LawFamily::uniform: return 0.5;
    case LawFamily::heavy_tail: return p1_ < 1.0 ? 1.0 / (1.0 - p1_) : kInf;
    case LawFamily::shifted_uniform: return 0.5 * (p1_ + p2_);
  }
  return 0.0;
}

double EntryLaw::variance() const {
  switch (family_) {
    case LawFamily::exponential: return 1.0 / (p1_ * p1_);
    case LawFamily::bernoulli: return p1_ * (1.0 - p1_);
    case LawFamily::uniform: return 1.0 / 12.0;
    case LawFamily::heavy_tail: {
      if (p1_ >= 0.5) return kInf;
      const double m = 1.0 / (1.0 - p1_);
      return 1.0 / (1.0 - 2.0 * p1_) - m * m;
    }
    case LawFamily::shifted_uniform: {
      const double w = p2_ - p1_;
      return w * w / 12.0;
    }
  }
  return 0.0;
}

double EntryLaw::stddev() const { return std::sqrt(variance()); }

double EntryLaw::effective_radius() const { return stddev() / mean(); }

double EntryLaw::zero_probability() const {
  return family_ == LawFamily::bernoulli ? 1.0 - p1_ : 0.0;
}

bool EntryLaw::has_bounded_density() const {
  // U^{-beta} has density x^{-1-1/beta} / beta on [1, inf), bounded by 1/beta.
  return family_ != LawFamily::bernoulli;
}

bool EntryLaw::has_finite_variance() const { return std::isfinite(variance()); }

double EntryLaw::sample(SeededStream& stream) const {
  switch (family_) {
    case LawFamily::exponential: return -std::log1p(-stream.next_uniform()) / p1_;
    case LawFamily::bernoulli: return stream.next_uniform() < p1_ ? 1.0 : 0.0;
    case LawFamily::uniform: return stream.next_uniform();
    case LawFamily::heavy_tail: return std::pow(stream.next_open_uniform(), -p1_);
    case LawFamily::shifted_uniform: return p1_ + (p2_ - p1_) * stream.next_uniform();
  }
  return 0.0;
}

std::string EntryLaw::to_string() const {
  switch (family_) {
    case LawFamily::exponential: return "exponential:rate=" + format_double(p1_);
    case LawFamily::bernoulli: return "bernoulli:p=" + format_double(p1_);
    case LawFamily::uniform: return "uniform";
    case LawFamily::heavy_tail: return "heavytail:beta=" + format_double(p1_);
    case LawFamily::shifted_uniform:
      return "shifteduniform:a=" + format_double(p1_) + ",b=" + format_double(p2_);
  }
  return {};
}

Eigen::MatrixXd sample_iid_matrix(Index n, const EntryLaw& law, SeededStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_iid_matrix: n must be >= 1");
  Eigen::MatrixXd x(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) x(i, j) = law.sample(stream);
  }
  return x;
}

Eigen::VectorXd MarkovSample::d_diagonal() const {
  Eigen::VectorXd d(row_sums.size());
  for (Index i = 0; i < d.size(); ++i) d(i) = row_sums(i) > 0.0 ? 1.0 / row_sums(i) : 1.0;
  return d;
}

MarkovSample to_markov(const Eigen::MatrixXd& x) {
  require_finite(x, "to_markov");
  if (x.rows() != x.cols()) throw std::invalid_argument("to_markov: matrix must be square");
  if ((x.array() < 0.0).any()) throw std::invalid_argument("to_markov: entries must be >= 0");

  const Index n = x.rows();
  MarkovSample sample;
  sample.x = x;
  sample.m_matrix.resize(n, n);
  sample.row_sums.resize(n);
  for (Index i = 0; i < n; ++i) {
    double rho = 0.0;
    for (Index j = 0; j < n; ++j) rho += x(i, j);
    sample.row_sums(i) = rho;
    if (rho == 0.0) {
      sample.fallback_rows.push_back(i);
      sample.m_matrix.row(i).setZero();
      sample.m_matrix(i, i) = 1.0;
    } else {
      for (Index j = 0; j < n; ++j) sample.m_matrix(i, j) = x(i, j) / rho;
    }
  }
  return sample;
}

MarkovSample dirichlet_markov_sample(Index n, SeededStream& stream) {
  return to_markov(sample_iid_matrix(n, EntryLaw::exponential(1.0), stream));
}

Eigen::MatrixXd mean_matrix(Index n, const EntryLaw& law) {
  if (n < 1) throw std::invalid_argument("mean_matrix: n must be >= 1");
  return Eigen::MatrixXd::Constant(n, n, law.mean());
}

}  // namespace rmarkov
