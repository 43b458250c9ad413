#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wristlink::theory {

/// Exam model inputs: mercenary knowledge p, recognition accuracy alpha,
/// options per question m, clean-option per-question success theta,
/// question count n and pass-mark r.
struct TheoryParams {
  double p = 0.9;
  double alpha = 0.9;
  int m = 4;
  double theta = 0.25;
  int n = 100;
  int r = 90;

  void validate() const;
};

/// Per-question success probability under the attack:
/// p * alpha + (1 - p)(1 - alpha) / (m - 1).
double beta(double p, double alpha, int m);

/// P(X >= r), X ~ Bin(n, q).
double binom_tail(int n, int r, double q);
/// log10 P(X >= r); -infinity when the tail is exactly zero (q = 0).
double log10_binom_tail(int n, int r, double q);

/// Ratio of attack to clean-option pass probabilities.
double mu(const TheoryParams& params);
double log10_mu(const TheoryParams& params);

double theta_threshold(double p, double alpha, int m);
/// True iff theta < theta_threshold (equality prefers the clean option).
bool prefers_attack(double theta, double p, double alpha, int m);

/// d theta_threshold / d alpha = (p m - 1) / (m - 1).
double dtheta_dalpha(double p, int m);

enum class SurfaceKind { Log10Mu, ThetaThreshold };

struct SurfaceGrid {
  SurfaceKind kind = SurfaceKind::Log10Mu;
  std::vector<double> p_axis;
  std::vector<double> alpha_axis;
  std::vector<std::vector<double>> values;  // values[i][j] at (p_axis[i], alpha_axis[j])
  int m = 4;
  double theta = 0.25;
  int n = 100;
  int r = 90;
};

/// Cell-wise log10_mu with theta defaulting to 1/m.
SurfaceGrid surface_grid(std::span<const double> p_axis, std::span<const double> alpha_axis, int m = 4,
                         double theta = -1.0, int n = 100, int r = 90);

SurfaceGrid threshold_surface_grid(std::span<const double> p_axis, std::span<const double> alpha_axis, int m = 4);

/// n = 100 with r = 90 for grade "A" and r = 70 for grade "C".
int pass_mark_for_grade(std::string_view grade);

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

struct SimulationResult {
  double estimate = 0.0;
  double standard_error = 0.0;  // sqrt(estimate (1 - estimate) / trials)
  double per_question_rate = 0.0;
  double per_question_se = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo exam: per question the mercenary is right with probability p;
/// the channel relays the mercenary's choice with probability alpha and
/// otherwise one of the other m - 1 options uniformly. Trial t draws from
/// its own counter stream, so results do not depend on work partitioning.
SimulationResult simulate_exam(const TheoryParams& params, std::int64_t trials, std::uint64_t seed);

/// Same estimator restricted to trials [first, last); summing the counts of
/// any partition reproduces simulate_exam exactly.
struct SimulationCounts {
  std::int64_t passes = 0;
  std::int64_t correct_answers = 0;
  std::int64_t trials = 0;
};
SimulationCounts simulate_exam_range(const TheoryParams& params, std::int64_t first, std::int64_t last,
                                     std::uint64_t seed);

}  // namespace wristlink::theory
