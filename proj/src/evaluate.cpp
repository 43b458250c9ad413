#include <algorithm>
#include <cmath>
#include <set>

#include "wristlink/error.hpp"
#include "wristlink/learn.hpp"

namespace wristlink {

std::string symbol_label(SymbolId s) { return std::string(1, s); }

void Dataset::validate() const {
  require(X.rows() >= 1, Errc::EmptyDataset, "dataset has no rows");
  require(static_cast<std::size_t>(X.rows()) == y.size(), Errc::ShapeMismatch,
          "label count differs from row count");
  require(X.allFinite(), Errc::InvalidConfig, "dataset contains non-finite values");
  for (int label : y) {
    require(label >= 0 && static_cast<std::size_t>(label) < classes.size(), Errc::InvalidConfig,
            "label outside the declared class set");
  }
}

Dataset Dataset::from_features(std::span<const FeatureVector> features, std::span<const SymbolId> labels,
                               std::span<const SymbolId> classes) {
  require(!features.empty(), Errc::EmptyDataset, "no feature vectors");
  require(features.size() == labels.size(), Errc::ShapeMismatch, "one label per feature vector");
  std::vector<SymbolId> cls(classes.begin(), classes.end());
  if (cls.empty()) {
    std::set<SymbolId> distinct(labels.begin(), labels.end());
    cls.assign(distinct.begin(), distinct.end());
  }
  Dataset ds;
  ds.X.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i][j];
    }
    const auto it = std::find(cls.begin(), cls.end(), labels[i]);
    require(it != cls.end(), Errc::UnknownSymbol, std::string("label '") + labels[i] + "' not declared");
    ds.y.push_back(static_cast<int>(it - cls.begin()));
  }
  for (SymbolId s : cls) ds.classes.push_back(symbol_label(s));
  return ds;
}

ColumnScaler ColumnScaler::fit(const Eigen::MatrixXd& X) {
  require(X.rows() >= 1, Errc::EmptyDataset, "cannot fit a scaler on no rows");
  ColumnScaler s;
  s.mean = X.colwise().mean().transpose();
  s.stddev.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    s.stddev(j) = std::sqrt((X.col(j).array() - s.mean(j)).square().mean());
  }
  return s;
}

Eigen::MatrixXd ColumnScaler::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out.col(j) = (X.col(j).array() - mean(j)) / std::max(stddev(j), 1e-12);
  }
  return out;
}

Eigen::VectorXd ColumnScaler::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out(j) = (x(j) - mean(j)) / std::max(stddev(j), 1e-12);
  return out;
}

Prediction predict(const Classifier& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

const std::vector<std::string>& classes_of(const Classifier& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.classes; }, model);
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : classes(std::move(labels)), counts(classes.size(), std::vector<long>(classes.size(), 0)) {}

void ConfusionMatrix::add(int truth, int predicted) {
  counts.at(static_cast<std::size_t>(truth)).at(static_cast<std::size_t>(predicted)) += 1;
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts) {
    for (long c : row) t += c;
  }
  return t;
}

std::vector<std::vector<double>> ConfusionMatrix::normalized() const {
  std::vector<std::vector<double>> out(counts.size(), std::vector<double>(counts.size(), 0.0));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long row = 0;
    for (long c : counts[i]) row += c;
    if (row == 0) continue;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(row);
    }
  }
  return out;
}

Evaluation evaluate(const Classifier& model, const Dataset& test) {
  test.validate();
  const auto& classes = classes_of(model);
  require(test.classes == classes, Errc::ShapeMismatch, "test labels do not match the model's classes");
  Evaluation ev{0.0, ConfusionMatrix(classes)};
  long correct = 0;
  std::vector<double> row(test.cols());
  for (Eigen::Index i = 0; i < test.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < test.X.cols(); ++j) row[static_cast<std::size_t>(j)] = test.X(i, j);
    const int pred = predict(model, row).label;
    const int truth = test.y[static_cast<std::size_t>(i)];
    ev.confusion.add(truth, pred);
    correct += pred == truth ? 1 : 0;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.rows());
  return ev;
}

std::vector<std::vector<double>> aggregate_confusions(std::span<const ConfusionMatrix> matrices) {
  require(!matrices.empty(), Errc::EmptyDataset, "no confusion matrices to aggregate");
  const std::size_t c = matrices.front().classes.size();
  std::vector<std::vector<double>> mean(c, std::vector<double>(c, 0.0));
  for (const auto& m : matrices) {
    require(m.classes == matrices.front().classes, Errc::ShapeMismatch, "confusion matrices use different classes");
    const auto norm = m.normalized();
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) mean[i][j] += norm[i][j];
    }
  }
  for (auto& row : mean) {
    for (auto& v : row) v /= static_cast<double>(matrices.size());
  }
  return mean;
}

}  // namespace wristlink
