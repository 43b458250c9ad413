#include <algorithm>
#include <cmath>
#include <deque>

#include "wristlink/error.hpp"
#include "wristlink/learn.hpp"

namespace wristlink {

namespace {

struct Unpacked {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

Unpacked unpack(const Eigen::VectorXd& params, int n_classes, Eigen::Index d) {
  Unpacked u;
  u.W.resize(n_classes, d);
  for (int c = 0; c < n_classes; ++c) u.W.row(c) = params.segment(c * d, d).transpose();
  u.b = params.tail(n_classes);
  return u;
}

/// Limited-memory BFGS update history used to form the search direction.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity) : capacity_(capacity) {}

  void push(Eigen::VectorXd s, Eigen::VectorXd y) {
    const double sy = s.dot(y);
    if (sy <= 1e-12) return;
    if (s_.size() == capacity_) {
      s_.pop_front();
      y_.pop_front();
      rho_.pop_front();
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    rho_.push_back(1.0 / sy);
  }

  void clear() {
    s_.clear();
    y_.clear();
    rho_.clear();
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& g) const {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_.size());
    for (std::size_t i = s_.size(); i-- > 0;) {
      alpha[i] = rho_[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    if (!s_.empty()) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double beta = rho_[i] * y_[i].dot(q);
      q += (alpha[i] - beta) * s_[i];
    }
    return -q;
  }

 private:
  std::size_t capacity_;
  std::deque<Eigen::VectorXd> s_, y_;
  std::deque<double> rho_;
};

void check_trainable(const Dataset& train) {
  train.validate();
  std::vector<int> per_class(train.classes.size(), 0);
  for (int label : train.y) ++per_class[static_cast<std::size_t>(label)];
  const auto present = std::count_if(per_class.begin(), per_class.end(), [](int c) { return c > 0; });
  require(present >= 2, Errc::DegenerateLabels, "logistic regression needs at least two classes");
  require(present == static_cast<std::ptrdiff_t>(per_class.size()), Errc::DegenerateLabels,
          "every declared class needs at least one sample");
}

}  // namespace

LossAndGradient logreg_objective(const Eigen::MatrixXd& X, std::span<const int> y, int n_classes,
                                 const Eigen::VectorXd& params, double l2_lambda) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  require(params.size() == n_classes * (d + 1), Errc::ShapeMismatch, "parameter vector size");
  require(static_cast<Eigen::Index>(y.size()) == n, Errc::ShapeMismatch, "label count");
  const Unpacked u = unpack(params, n_classes, d);

  Eigen::MatrixXd scores = X * u.W.transpose();
  scores.rowwise() += u.b.transpose();
  double loss = 0.0;
  Eigen::MatrixXd residual(n, n_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = scores.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    loss += std::log(z) + mx - scores(i, y[static_cast<std::size_t>(i)]);
    residual.row(i) = e / z;
    residual(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * l2_lambda * u.W.squaredNorm();

  const Eigen::MatrixXd gW = inv_n * residual.transpose() * X + l2_lambda * u.W;
  const Eigen::VectorXd gb = inv_n * residual.colwise().sum().transpose();
  LossAndGradient out;
  out.loss = loss;
  out.gradient.resize(params.size());
  for (int c = 0; c < n_classes; ++c) out.gradient.segment(c * d, d) = gW.row(c).transpose();
  out.gradient.tail(n_classes) = gb;
  return out;
}

LogRegFit train_logreg_detailed(const Dataset& train, const LogRegConfig& config) {
  check_trainable(train);
  require(config.l2_lambda >= 0.0 && config.max_iters >= 0 && config.tol > 0.0, Errc::InvalidConfig,
          "invalid logistic regression configuration");
  const int n_classes = static_cast<int>(train.classes.size());
  const Eigen::Index d = train.X.cols();

  LogRegFit fit;
  fit.model.classes = train.classes;
  fit.model.standardized = config.standardize;
  Eigen::MatrixXd X = train.X;
  if (config.standardize) {
    fit.model.scaler = ColumnScaler::fit(train.X);
    X = fit.model.scaler.apply(train.X);
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_classes * (d + 1));
  LossAndGradient cur = logreg_objective(X, train.y, n_classes, theta, config.l2_lambda);
  fit.loss_history.push_back(cur.loss);
  LbfgsMemory memory(10);
  constexpr double kArmijo = 1e-4;

  int it = 0;
  for (; it < config.max_iters; ++it) {
    if (cur.gradient.norm() <= config.tol) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd dir = memory.direction(cur.gradient);
    double slope = cur.gradient.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -cur.gradient;
      slope = -cur.gradient.squaredNorm();
    }
    double step = it == 0 ? std::min(1.0, 1.0 / cur.gradient.norm()) : 1.0;
    bool accepted = false;
    LossAndGradient next;
    Eigen::VectorXd candidate;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = theta + step * dir;
      next = logreg_objective(X, train.y, n_classes, candidate, config.l2_lambda);
      if (std::isfinite(next.loss) && next.loss <= cur.loss + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at working precision
    memory.push(candidate - theta, next.gradient - cur.gradient);
    theta = std::move(candidate);
    cur = std::move(next);
    fit.loss_history.push_back(cur.loss);
  }
  if (!fit.converged && cur.gradient.norm() <= config.tol) fit.converged = true;
  fit.iterations = it;
  fit.grad_norm = cur.gradient.norm();

  const Unpacked u = unpack(theta, n_classes, d);
  fit.model.weights = u.W;
  fit.model.bias = u.b;
  return fit;
}

LogRegModel train_logreg(const Dataset& train, const LogRegConfig& config) {
  return train_logreg_detailed(train, config).model;
}

Prediction predict(const LogRegModel& model, std::span<const double> x) {
  require(x.size() == model.dimension(), Errc::ShapeMismatch,
          "feature vector has " + std::to_string(x.size()) + " values, model expects " +
              std::to_string(model.dimension()));
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (model.standardized) v = model.scaler.apply(v);
  const Eigen::VectorXd scores = model.weights * v + model.bias;
  const double mx = scores.maxCoeff();
  Eigen::VectorXd e = (scores.array() - mx).exp().matrix();
  e /= e.sum();
  Prediction p;
  p.probabilities.assign(e.data(), e.data() + e.size());
  p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                             p.probabilities.begin());
  return p;
}

}  // namespace wristlink
