#include "wristlink/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wristlink/error.hpp"
#include "wristlink/rng.hpp"

namespace wristlink::theory {

namespace {

bool unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_options(int m) { require(m >= 2, Errc::InvalidOptions, "need at least two answer options"); }

void check_probability(double v, const char* name) {
  require(unit_interval(v), Errc::InvalidParams, std::string(name) + " must lie in [0, 1]");
}

void check_tail_args(int n, int r, double q) {
  require(n >= 1, Errc::InvalidParams, "n must be at least 1");
  require(r >= 1 && r <= n, Errc::InvalidParams, "pass-mark must lie in 1..n");
  check_probability(q, "q");
}

/// Natural log of P(X >= r) in extended precision; -inf for an empty tail.
long double log_tail(int n, int r, double q) {
  if (q <= 0.0) return -std::numeric_limits<long double>::infinity();
  if (q >= 1.0) return 0.0L;
  const long double lq = std::log(static_cast<long double>(q));
  const long double l1q = std::log1p(-static_cast<long double>(q));
  const long double lnf = std::lgamma(static_cast<long double>(n) + 1.0L);
  std::vector<long double> terms;
  terms.reserve(static_cast<std::size_t>(n - r + 1));
  long double mx = -std::numeric_limits<long double>::infinity();
  for (int k = r; k <= n; ++k) {
    const long double t = lnf - std::lgamma(static_cast<long double>(k) + 1.0L) -
                          std::lgamma(static_cast<long double>(n - k) + 1.0L) + k * lq + (n - k) * l1q;
    terms.push_back(t);
    mx = std::max(mx, t);
  }
  long double s = 0.0L;
  for (long double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace

void TheoryParams::validate() const {
  check_probability(p, "p");
  check_probability(alpha, "alpha");
  check_probability(theta, "theta");
  check_options(m);
  require(n >= 1, Errc::InvalidParams, "n must be at least 1");
  require(r >= 1 && r <= n, Errc::InvalidParams, "pass-mark must lie in 1..n");
}

double beta(double p, double alpha, int m) {
  check_options(m);
  check_probability(p, "p");
  check_probability(alpha, "alpha");
  const double b = p * alpha + (1.0 - p) * (1.0 - alpha) / static_cast<double>(m - 1);
  return std::clamp(b, 0.0, 1.0);
}

double binom_tail(int n, int r, double q) {
  check_tail_args(n, r, q);
  return static_cast<double>(std::exp(log_tail(n, r, q)));
}

double log10_binom_tail(int n, int r, double q) {
  check_tail_args(n, r, q);
  return static_cast<double>(log_tail(n, r, q) / std::log(10.0L));
}

double log10_mu(const TheoryParams& params) {
  params.validate();
  require(params.theta > 0.0, Errc::DegenerateBaseline, "clean-option pass probability is zero (theta = 0)");
  const double b = beta(params.p, params.alpha, params.m);
  return static_cast<double>((log_tail(params.n, params.r, b) - log_tail(params.n, params.r, params.theta)) /
                             std::log(10.0L));
}

double mu(const TheoryParams& params) {
  params.validate();
  require(params.theta > 0.0, Errc::DegenerateBaseline, "clean-option pass probability is zero (theta = 0)");
  const double b = beta(params.p, params.alpha, params.m);
  return static_cast<double>(std::exp(log_tail(params.n, params.r, b) - log_tail(params.n, params.r, params.theta)));
}

double theta_threshold(double p, double alpha, int m) { return beta(p, alpha, m); }

bool prefers_attack(double theta, double p, double alpha, int m) {
  check_probability(theta, "theta");
  return theta < theta_threshold(p, alpha, m);
}

double dtheta_dalpha(double p, int m) {
  check_options(m);
  check_probability(p, "p");
  return (p * m - 1.0) / static_cast<double>(m - 1);
}

SurfaceGrid surface_grid(std::span<const double> p_axis, std::span<const double> alpha_axis, int m, double theta,
                         int n, int r) {
  check_options(m);
  SurfaceGrid g;
  g.kind = SurfaceKind::Log10Mu;
  g.p_axis.assign(p_axis.begin(), p_axis.end());
  g.alpha_axis.assign(alpha_axis.begin(), alpha_axis.end());
  g.m = m;
  g.theta = theta < 0.0 ? 1.0 / m : theta;
  g.n = n;
  g.r = r;
  for (double p : p_axis) {
    std::vector<double> row;
    row.reserve(alpha_axis.size());
    for (double a : alpha_axis) row.push_back(log10_mu({p, a, m, g.theta, n, r}));
    g.values.push_back(std::move(row));
  }
  return g;
}

SurfaceGrid threshold_surface_grid(std::span<const double> p_axis, std::span<const double> alpha_axis, int m) {
  check_options(m);
  SurfaceGrid g;
  g.kind = SurfaceKind::ThetaThreshold;
  g.p_axis.assign(p_axis.begin(), p_axis.end());
  g.alpha_axis.assign(alpha_axis.begin(), alpha_axis.end());
  g.m = m;
  g.theta = 1.0 / m;
  for (double p : p_axis) {
    std::vector<double> row;
    row.reserve(alpha_axis.size());
    for (double a : alpha_axis) row.push_back(theta_threshold(p, a, m));
    g.values.push_back(std::move(row));
  }
  return g;
}

int pass_mark_for_grade(std::string_view grade) {
  if (grade == "A") return 90;
  if (grade == "C") return 70;
  fail(Errc::InvalidParams, "grade must be 'A' or 'C'");
}

std::vector<double> linspace(double lo, double hi, int count) {
  require(count >= 1, Errc::InvalidParams, "linspace needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  v.back() = hi;
  return v;
}

SimulationCounts simulate_exam_range(const TheoryParams& params, std::int64_t first, std::int64_t last,
                                     std::uint64_t seed) {
  params.validate();
  require(first >= 0 && last >= first, Errc::InvalidParams, "invalid trial range");
  const auto others = static_cast<std::uint64_t>(params.m - 1);
  SimulationCounts c;
  for (std::int64_t t = first; t < last; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    int score = 0;
    for (int q = 0; q < params.n; ++q) {
      // Option 0 is the correct answer.
      const std::uint64_t chosen = rng.uniform() < params.p ? 0 : 1 + rng.below(others);
      std::uint64_t relayed = chosen;
      if (!(rng.uniform() < params.alpha)) {
        const std::uint64_t j = rng.below(others);
        relayed = j < chosen ? j : j + 1;
      }
      score += relayed == 0 ? 1 : 0;
    }
    c.correct_answers += score;
    c.passes += score >= params.r ? 1 : 0;
    ++c.trials;
  }
  return c;
}

SimulationResult simulate_exam(const TheoryParams& params, std::int64_t trials, std::uint64_t seed) {
  require(trials >= 1, Errc::InvalidParams, "need at least one trial");
  const SimulationCounts c = simulate_exam_range(params, 0, trials, seed);
  SimulationResult r;
  r.trials = trials;
  r.seed = seed;
  const double nt = static_cast<double>(trials);
  r.estimate = static_cast<double>(c.passes) / nt;
  r.standard_error = std::sqrt(r.estimate * (1.0 - r.estimate) / nt);
  const double nq = nt * params.n;
  r.per_question_rate = static_cast<double>(c.correct_answers) / nq;
  r.per_question_se = std::sqrt(r.per_question_rate * (1.0 - r.per_question_rate) / nq);
  return r;
}

}  // namespace wristlink::theory
