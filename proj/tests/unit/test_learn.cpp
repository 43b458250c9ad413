#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "wristlink/error.hpp"
#include "wristlink/learn.hpp"
#include "wristlink/rng.hpp"

using namespace wristlink;

namespace {

/// Two 1-D Gaussian classes whose means sit 10 sigma apart.
Dataset separable(int per_class, std::uint64_t seed) {
  CounterRng rng(seed);
  Dataset d;
  d.X.resize(2 * per_class, 1);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int c = i % 2;
    d.X(i, 0) = (c == 0 ? -5.0 : 5.0) + rng.normal();
    d.y.push_back(c);
  }
  d.classes = {"lo", "hi"};
  return d;
}

Dataset blobs(int k, int per_blob, int dim, double spread, std::uint64_t seed) {
  CounterRng rng(seed);
  Dataset d;
  d.X.resize(k * per_blob, dim);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < per_blob; ++i) {
      const int row = c * per_blob + i;
      for (int j = 0; j < dim; ++j) d.X(row, j) = (j == c % dim ? spread : 0.0) * (c < dim ? 1.0 : -1.0) + rng.normal();
      d.y.push_back(c);
    }
  }
  for (int c = 0; c < k; ++c) d.classes.push_back("c" + std::to_string(c));
  return d;
}

double train_accuracy(const Classifier& m, const Dataset& d) { return evaluate(m, d).accuracy; }

}  // namespace

TEST_CASE("logistic regression separates well-separated classes") {
  const auto d = separable(40, 3);
  const auto m = train_logreg(d);
  CHECK(train_accuracy(Classifier{m}, d) == 1.0);
}

TEST_CASE("logistic loss is non-increasing and converges") {
  const auto d = blobs(4, 25, 6, 3.0, 8);
  const auto fit = train_logreg_detailed(d);
  REQUIRE(fit.loss_history.size() >= 2);
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i) CHECK(fit.loss_history[i] <= fit.loss_history[i - 1] + 1e-15);
  CHECK(fit.converged);
  CHECK(fit.grad_norm <= LogRegConfig{}.tol);
}

TEST_CASE("logistic gradient matches central differences") {
  const auto d = blobs(3, 10, 4, 2.0, 21);
  const int k = 3;
  const auto p = static_cast<Eigen::Index>(k * (d.cols() + 1));
  CounterRng rng(5);
  Eigen::VectorXd w(p);
  for (Eigen::Index i = 0; i < p; ++i) w(i) = 0.3 * rng.normal();
  const auto at = logreg_objective(d.X, d.y, k, w, 1e-3);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::VectorXd plus = w;
    Eigen::VectorXd minus = w;
    plus(i) += h;
    minus(i) -= h;
    const double fd = (logreg_objective(d.X, d.y, k, plus, 1e-3).loss - logreg_objective(d.X, d.y, k, minus, 1e-3).loss) / (2 * h);
    CHECK(std::abs(fd - at.gradient(i)) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("duplicated training data gives the same decision function") {
  const auto d = blobs(3, 12, 3, 2.5, 4);
  Dataset dd = d;
  dd.X.resize(2 * d.X.rows(), d.X.cols());
  dd.X << d.X, d.X;
  dd.y.insert(dd.y.end(), d.y.begin(), d.y.end());
  const auto a = train_logreg(d);
  const auto b = train_logreg(dd);
  const auto probe = blobs(3, 20, 3, 2.5, 99);
  for (Eigen::Index i = 0; i < probe.X.rows(); ++i) {
    const Eigen::VectorXd row = probe.X.row(i);
    CHECK(predict(a, std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).label ==
          predict(b, std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).label);
  }
}

TEST_CASE("logistic regression rejects a single class") {
  Dataset d = separable(5, 1);
  std::fill(d.y.begin(), d.y.end(), 0);
  CHECK_THROWS_AS(train_logreg(d), Error);
}

TEST_CASE("zero-weight logistic model predicts uniformly") {
  LogRegModel m;
  m.weights = Eigen::MatrixXd::Zero(3, 2);
  m.bias = Eigen::VectorXd::Zero(3);
  m.classes = {"a", "b", "c"};
  const std::vector<double> x{0.7, -2.0};
  const auto p = predict(m, x);
  CHECK(p.label == 0);
  for (double v : p.probabilities) CHECK(v == doctest::Approx(1.0 / 3.0));
  const std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(predict(m, wrong), Error);
}

TEST_CASE("random forest") {
  SUBCASE("separable data is fit exactly") {
    const auto d = separable(30, 6);
    const auto f = train_forest(d);
    CHECK(f.trees.size() == 60);
    CHECK(train_accuracy(Classifier{f}, d) == 1.0);
  }

  SUBCASE("single class") {
    Dataset d = separable(10, 2);
    std::fill(d.y.begin(), d.y.end(), 1);
    const auto f = train_forest(d);
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
      const Eigen::VectorXd row = d.X.row(i);
      const auto p = predict(f, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
      CHECK(p.label == 1);
      CHECK(p.probabilities[1] == doctest::Approx(1.0));
    }
  }

  SUBCASE("deterministic given the seed") {
    const auto d = blobs(4, 15, 8, 2.0, 12);
    ForestConfig c;
    c.seed = 77;
    const auto a = train_forest(d, c);
    const auto b = train_forest(d, c);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
      CHECK(a.trees[t].feature == b.trees[t].feature);
      CHECK(a.trees[t].threshold == b.trees[t].threshold);
    }
    c.seed = 78;
    const auto e = train_forest(d, c);
    bool differs = false;
    for (std::size_t t = 0; t < a.trees.size(); ++t) differs = differs || a.trees[t].threshold != e.trees[t].threshold;
    CHECK(differs);
  }

  SUBCASE("identical single-leaf trees") {
    ForestModel f;
    f.classes = {"a", "b", "c"};
    f.dimension = 2;
    DecisionTree leaf;
    leaf.feature = {-1};
    leaf.threshold = {0.0};
    leaf.left = {-1};
    leaf.right = {-1};
    leaf.value = {{0.0, 0.0, 4.0}};
    f.trees = {leaf, leaf, leaf};
    const std::vector<double> x{1.0, 2.0};
    const auto p = predict(f, x);
    CHECK(p.label == 2);
    CHECK(p.probabilities[2] == 1.0);
  }
}

TEST_CASE("probabilities are normalized") {
  const auto d = blobs(4, 10, 5, 1.0, 31);
  const Classifier lr = train_logreg(d);
  const Classifier rf = train_forest(d);
  CounterRng rng(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(5);
    for (auto& v : x) v = 4.0 * rng.normal();
    for (const Classifier* m : {&lr, &rf}) {
      const auto p = predict(*m, x);
      const double s = std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
      for (double v : p.probabilities) CHECK(v >= 0.0);
      const auto best = std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin();
      CHECK(p.label == best);
    }
  }
}

TEST_CASE("kmeans") {
  SUBCASE("n == k") {
    Eigen::MatrixXd pts(4, 2);
    pts << 0, 0, 1, 0, 0, 1, 5, 5;
    const auto r = kmeans(pts);
    CHECK(r.inertia == doctest::Approx(0.0));
    CHECK(std::set<int>(r.assignment.begin(), r.assignment.end()).size() == 4);
  }

  SUBCASE("separated blobs") {
    const auto d = blobs(4, 20, 4, 20.0, 55);
    const auto r = kmeans(d.X);
    for (int c = 0; c < 4; ++c) {
      std::set<int> labels;
      for (int i = 0; i < 20; ++i) labels.insert(r.assignment[static_cast<std::size_t>(c * 20 + i)]);
      CHECK(labels.size() == 1);
    }
    CHECK(std::set<int>(r.assignment.begin(), r.assignment.end()).size() == 4);
  }

  SUBCASE("inertia is non-increasing and the result deterministic") {
    const auto d = blobs(5, 12, 3, 1.5, 9);
    KMeansConfig c;
    c.seed = 4;
    const auto a = kmeans(d.X, c);
    const auto b = kmeans(d.X, c);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i) CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-12);
  }

  CHECK_THROWS_AS(kmeans(Eigen::MatrixXd::Zero(3, 2)), Error);
}

TEST_CASE("select_symbols") {
  KMeansResult r;
  r.centroids = Eigen::MatrixXd::Zero(4, 1);
  const std::vector<SymbolId> four{'E', 'C', 'B', 'A'};
  r.assignment = {0, 1, 2, 3};
  CHECK(select_symbols(r, four) == std::vector<SymbolId>{'E', 'C', 'B', 'A'});

  const std::vector<SymbolId> cand{'H', 'E', 'I', 'A', 'B', 'C'};
  r.assignment = {2, 2, 2, 0, 1, 3};
  const auto s = select_symbols(r, cand);
  CHECK(s[2] == 'E');

  r.assignment = {0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(select_symbols(r, cand), Error);
  r.assignment = {0, 1, 2, 3, 4, 0};
  CHECK_THROWS_AS(select_symbols(r, cand), Error);
}

TEST_CASE("evaluation") {
  const auto d = blobs(4, 5, 4, 30.0, 1);
  const Classifier lr = train_logreg(d);
  const auto e = evaluate(lr, d);
  CHECK(e.accuracy == 1.0);
  const auto n = e.confusion.normalized();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(n[i][j] == (i == j ? 1.0 : 0.0));

  ConfusionMatrix constant(d.classes);
  for (int y : d.y) constant.add(y, 0);
  long correct = 0;
  for (std::size_t i = 0; i < 4; ++i) correct += constant.counts[i][i];
  CHECK(static_cast<double>(correct) / static_cast<double>(constant.total()) == 0.25);

  std::vector<ConfusionMatrix> same{constant, constant, constant};
  CHECK(aggregate_confusions(same) == constant.normalized());
  for (const auto& row : constant.normalized()) {
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }

  Dataset empty;
  empty.X.resize(0, 4);
  empty.classes = d.classes;
  CHECK_THROWS_AS(evaluate(lr, empty), Error);
}
