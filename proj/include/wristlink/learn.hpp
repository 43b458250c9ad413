#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wristlink/features.hpp"
#include "wristlink/signal.hpp"

namespace wristlink {

/// n x d design matrix with integer labels indexing `classes`.
struct Dataset {
  Eigen::MatrixXd X;
  std::vector<int> y;
  std::vector<std::string> classes;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(X.cols()); }
  void validate() const;

  /// Classes are the sorted distinct labels unless `classes` is given.
  static Dataset from_features(std::span<const FeatureVector> features,
                               std::span<const SymbolId> labels,
                               std::span<const SymbolId> classes = {});
};

std::string symbol_label(SymbolId s);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Column-wise z-scoring fitted on training rows.
struct ColumnScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  static ColumnScaler fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// ---------------------------------------------------------------------------
// Multinomial logistic regression

struct LogRegConfig {
  double l2_lambda = 1e-3;
  int max_iters = 1000;
  double tol = 1e-6;
  bool standardize = true;
};

struct LogRegModel {
  Eigen::MatrixXd weights;  // classes x d
  Eigen::VectorXd bias;     // classes
  std::vector<std::string> classes;
  bool standardized = false;
  ColumnScaler scaler;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct LogRegFit {
  LogRegModel model;
  std::vector<double> loss_history;  // one entry per accepted iterate, starting at W = 0
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // weights row-major, then bias
};

/// Mean cross-entropy + (lambda / 2) ||W||^2 at the packed parameter vector
/// (weights row-major, then bias). X is used as given (no scaling).
LossAndGradient logreg_objective(const Eigen::MatrixXd& X, std::span<const int> y, int n_classes,
                                 const Eigen::VectorXd& params, double l2_lambda);

LogRegFit train_logreg_detailed(const Dataset& train, const LogRegConfig& config = {});
LogRegModel train_logreg(const Dataset& train, const LogRegConfig& config = {});

// ---------------------------------------------------------------------------
// Random forest

/// Flat tree arrays; feature < 0 marks a leaf whose class counts are in value.
struct DecisionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<std::vector<double>> value;

  int leaf_for(std::span<const double> x) const;
  std::size_t node_count() const noexcept { return feature.size(); }
};

struct ForestConfig {
  int n_trees = 60;
  int max_features = 0;  // 0 selects floor(sqrt(d))
  int min_leaf = 1;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::vector<std::string> classes;
  std::size_t dimension = 0;
};

ForestModel train_forest(const Dataset& train, const ForestConfig& config = {});

// ---------------------------------------------------------------------------
// Prediction and evaluation

using Classifier = std::variant<LogRegModel, ForestModel>;

Prediction predict(const LogRegModel& model, std::span<const double> x);
Prediction predict(const ForestModel& model, std::span<const double> x);
Prediction predict(const Classifier& model, std::span<const double> x);
const std::vector<std::string>& classes_of(const Classifier& model);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<long>> counts;  // true class by row, predicted by column

  explicit ConfusionMatrix(std::vector<std::string> labels = {});
  void add(int truth, int predicted);
  long total() const;
  /// Rows divided by their totals; rows with no samples stay zero.
  std::vector<std::vector<double>> normalized() const;
};

struct Evaluation {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

Evaluation evaluate(const Classifier& model, const Dataset& test);
std::vector<std::vector<double>> aggregate_confusions(std::span<const ConfusionMatrix> matrices);

// ---------------------------------------------------------------------------
// K-means

struct KMeansResult {
  Eigen::MatrixXd centroids;  // K x d
  std::vector<int> assignment;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // winning restart, after each assignment step
};

struct KMeansConfig {
  int k = 4;
  int restarts = 10;
  int max_iters = 300;
  std::uint64_t seed = 0;
};

KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansConfig& config = {});

/// Answer-option letters first, then other letters case-insensitively, then digits.
std::vector<SymbolId> default_symbol_preference(std::span<const SymbolId> candidates);

/// One symbol per cluster (cluster order): the most preferred candidate
/// assigned to that cluster. candidates[i] labels point i of the clustering.
std::vector<SymbolId> select_symbols(const KMeansResult& clusters,
                                     std::span<const SymbolId> candidates,
                                     std::span<const SymbolId> preference = {});

}  // namespace wristlink
