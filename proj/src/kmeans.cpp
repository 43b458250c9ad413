#include <algorithm>
#include <cctype>
#include <limits>

#include "wristlink/error.hpp"
#include "wristlink/learn.hpp"
#include "wristlink/rng.hpp"

namespace wristlink {

namespace {

struct Assignment {
  std::vector<int> labels;
  std::vector<double> dist2;
  double inertia = 0.0;
};

Assignment assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids) {
  Assignment a;
  const auto n = points.rows();
  a.labels.resize(static_cast<std::size_t>(n));
  a.dist2.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    a.labels[static_cast<std::size_t>(i)] = best;
    a.dist2[static_cast<std::size_t>(i)] = best_d;
    a.inertia += best_d;
  }
  return a;
}

/// k-means++ seeding.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, int k, CounterRng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd c(k, points.cols());
  c.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - c.row(j - 1)).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0 && u < d2[i]) {
          pick = i;
          break;
        }
        u -= d2[i];
      }
      if (pick == n) {  // rounding left u past the end
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    c.row(j) = points.row(static_cast<Eigen::Index>(pick));
  }
  return c;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, int max_iters) {
  const int k = static_cast<int>(centroids.rows());
  KMeansResult r;
  Assignment a = assign(points, centroids);
  r.inertia_history.push_back(a.inertia);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int l = a.labels[static_cast<std::size_t>(i)];
      next.row(l) += points.row(i);
      ++sizes[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: re-seed from the point farthest from its centroid.
      const auto far = static_cast<Eigen::Index>(
          std::max_element(a.dist2.begin(), a.dist2.end()) - a.dist2.begin());
      next.row(c) = points.row(far);
      a.dist2[static_cast<std::size_t>(far)] = 0.0;
    }
    centroids = std::move(next);
    Assignment updated = assign(points, centroids);
    r.inertia_history.push_back(updated.inertia);
    const bool stable = updated.labels == a.labels;
    a = std::move(updated);
    if (stable) break;
  }
  r.centroids = std::move(centroids);
  r.assignment = std::move(a.labels);
  r.inertia = a.inertia;
  return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansConfig& config) {
  require(config.k >= 1 && config.restarts >= 1 && config.max_iters >= 1, Errc::InvalidConfig,
          "invalid k-means configuration");
  require(points.rows() >= config.k, Errc::TooFewPoints,
          std::to_string(points.rows()) + " points cannot form " + std::to_string(config.k) + " clusters");
  require(points.allFinite(), Errc::InvalidConfig, "points must be finite");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < config.restarts; ++r) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(r));
    KMeansResult run = lloyd(points, seed_centroids(points, config.k, rng), config.max_iters);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

std::vector<SymbolId> default_symbol_preference(std::span<const SymbolId> candidates) {
  std::vector<SymbolId> out(candidates.begin(), candidates.end());
  auto rank = [](SymbolId s) {
    const auto u = static_cast<unsigned char>(s);
    if (s >= 'A' && s <= 'D') return std::pair{0, static_cast<int>(s)};
    if (std::isalpha(u)) return std::pair{1, std::toupper(u) * 2 + (std::islower(u) ? 1 : 0)};
    return std::pair{2, static_cast<int>(s)};
  };
  std::sort(out.begin(), out.end(), [&](SymbolId a, SymbolId b) { return rank(a) < rank(b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<SymbolId> select_symbols(const KMeansResult& clusters, std::span<const SymbolId> candidates,
                                     std::span<const SymbolId> preference) {
  require(candidates.size() == clusters.assignment.size(), Errc::ShapeMismatch,
          "one candidate symbol per clustered point is required");
  const std::vector<SymbolId> pref = preference.empty()
                                         ? default_symbol_preference(candidates)
                                         : std::vector<SymbolId>(preference.begin(), preference.end());
  auto rank_of = [&](SymbolId s) {
    const auto it = std::find(pref.begin(), pref.end(), s);
    return it == pref.end() ? pref.size() : static_cast<std::size_t>(it - pref.begin());
  };
  const auto k = static_cast<std::size_t>(clusters.centroids.rows());
  std::vector<SymbolId> chosen(k, '\0');
  std::vector<std::size_t> chosen_rank(k, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    require(clusters.assignment[i] >= 0 && static_cast<std::size_t>(clusters.assignment[i]) < k,
            Errc::ShapeMismatch, "assignment refers to a cluster without a centroid");
    const auto c = static_cast<std::size_t>(clusters.assignment[i]);
    const std::size_t rank = rank_of(candidates[i]);
    if (rank < chosen_rank[c]) {
      chosen_rank[c] = rank;
      chosen[c] = candidates[i];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    require(chosen[c] != '\0', Errc::NoCoverage, "cluster " + std::to_string(c + 1) + " has no candidate symbol");
  }
  return chosen;
}

}  // namespace wristlink
