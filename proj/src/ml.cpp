#include "freetopo/ml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace freetopo {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Platform-independent seeded shuffle; std::shuffle's draw sequence is not
// pinned by the standard.
void seeded_shuffle(std::vector<int>& v, std::uint64_t seed) {
  std::uint64_t state = seed;
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[splitmix64(state) % i]);
}

Eigen::MatrixXd design_matrix(std::span<const std::vector<double>> X) {
  const auto n = static_cast<Eigen::Index>(X.size());
  const auto p = n > 0 ? static_cast<Eigen::Index>(X[0].size()) : 0;
  Eigen::MatrixXd a(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) a(i, j + 1) = X[i][j];
  }
  return a;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double lasso_objective(std::span<const std::vector<double>> X, std::span<const double> y,
                       const LinearModel& m, double lambda) {
  const auto n = X.size();
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - m.predict(X[i]);
    rss += r * r;
  }
  double l1 = 0;
  for (double w : m.coef) l1 += std::abs(w);
  return rss / (2.0 * static_cast<double>(n)) + lambda * l1;
}

double mean_of(std::span<const double> y) {
  if (y.empty()) return 0.0;
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::LR: return "lr";
    case ModelKind::LASSO: return "lasso";
    case ModelKind::DTLA: return "dtla";
    case ModelKind::DTLR: return "dtlr";
  }
  return "dtlr";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  if (name == "lr") return ModelKind::LR;
  if (name == "lasso") return ModelKind::LASSO;
  if (name == "dtla") return ModelKind::DTLA;
  if (name == "dtlr") return ModelKind::DTLR;
  return std::nullopt;
}

double LinearModel::predict(std::span<const double> x) const {
  double acc = intercept;
  for (std::size_t j = 0; j < coef.size() && j < x.size(); ++j) acc += coef[j] * x[j];
  return acc;
}

LinearModel fit_lr(std::span<const std::vector<double>> X, std::span<const double> y) {
  if (X.size() < 2)
    throw DegenerateFit("least squares needs at least 2 rows, have " +
                        std::to_string(X.size()) + "; consider the lasso model");

  Eigen::MatrixXd a = design_matrix(X);
  Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = y[i];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd w;
  if (qr.rank() == a.cols()) {
    w = qr.solve(b);
  } else {
    // Rank-deficient design: ridge jitter on everything but the intercept.
    Eigen::MatrixXd m = a.transpose() * a;
    for (Eigen::Index j = 1; j < m.rows(); ++j) m(j, j) += 1e-8;
    w = m.ldlt().solve(a.transpose() * b);
  }

  LinearModel model;
  model.intercept = w(0);
  model.coef.assign(w.size() - 1, 0.0);
  for (Eigen::Index j = 1; j < w.size(); ++j) model.coef[j - 1] = w(j);
  return model;
}

double lasso_lambda_max(std::span<const std::vector<double>> X, std::span<const double> y) {
  if (X.empty()) return 0.0;
  const auto n = X.size();
  const auto p = X[0].size();
  double ybar = mean_of(y);
  double best = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double dot = 0;
    for (std::size_t i = 0; i < n; ++i) dot += X[i][j] * (y[i] - ybar);
    best = std::max(best, std::abs(dot) / static_cast<double>(n));
  }
  return best;
}

LinearModel fit_lasso(std::span<const std::vector<double>> X, std::span<const double> y,
                      double lambda, std::vector<double>* objective_trace) {
  LinearModel model;
  const auto n = X.size();
  const auto p = n > 0 ? X[0].size() : 0;
  model.coef.assign(p, 0.0);
  model.intercept = mean_of(y);
  if (n == 0 || p == 0) return model;

  std::vector<double> col_sq(p, 0.0);  // (1/n) sum of squares per column
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) col_sq[j] += X[i][j] * X[i][j];
    col_sq[j] /= static_cast<double>(n);
  }

  std::vector<double> residual(n);  // y - intercept - Xw
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - model.intercept;

  double prev_objective = lasso_objective(X, y, model, lambda);
  if (objective_trace) objective_trace->push_back(prev_objective);

  constexpr int kMaxSweeps = 100000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_delta = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      double rho = 0;
      for (std::size_t i = 0; i < n; ++i) rho += X[i][j] * (residual[i] + model.coef[j] * X[i][j]);
      rho /= static_cast<double>(n);
      double updated = soft_threshold(rho, lambda) / col_sq[j];
      double delta = updated - model.coef[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * X[i][j];
        model.coef[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    double mean_residual = mean_of(residual);
    if (mean_residual != 0.0) {
      model.intercept += mean_residual;
      for (double& r : residual) r -= mean_residual;
      max_delta = std::max(max_delta, std::abs(mean_residual));
    }

    double objective = lasso_objective(X, y, model, lambda);
    if (objective_trace) objective_trace->push_back(objective);
    bool settled = prev_objective - objective < 1e-7 && max_delta < 1e-10;
    prev_objective = objective;
    if (settled) break;
  }
  return model;
}

LinearModel fit_lasso_cv(std::span<const std::vector<double>> X, std::span<const double> y,
                         const ModelSpec& spec, double* chosen_lambda) {
  const auto n = static_cast<int>(X.size());
  double lambda_max = lasso_lambda_max(X, y);
  if (n < 2 || lambda_max == 0.0) {
    LinearModel model;
    model.coef.assign(n > 0 ? X[0].size() : 0, 0.0);
    model.intercept = mean_of(y);
    if (chosen_lambda) *chosen_lambda = lambda_max;
    return model;
  }

  std::vector<double> grid;
  grid.reserve(spec.lasso_grid);
  for (int k = 0; k < spec.lasso_grid; ++k)
    grid.push_back(lambda_max *
                   std::pow(10.0, -spec.lasso_decades * k / (spec.lasso_grid - 1.0)));

  int folds = std::min(spec.cv_folds, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  seeded_shuffle(order, spec.seed);
  std::vector<int> fold_of(n);
  for (int i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

  double best_error = std::numeric_limits<double>::infinity();
  double best_lambda = grid[0];
  for (double lambda : grid) {
    double error = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> train_x;
      std::vector<double> train_y;
      for (int i = 0; i < n; ++i)
        if (fold_of[i] != f) {
          train_x.push_back(X[i]);
          train_y.push_back(y[i]);
        }
      LinearModel m = fit_lasso(train_x, train_y, lambda);
      for (int i = 0; i < n; ++i)
        if (fold_of[i] == f) {
          double r = y[i] - m.predict(X[i]);
          error += r * r;
        }
    }
    if (error < best_error) {  // ties keep the earlier, larger lambda
      best_error = error;
      best_lambda = lambda;
    }
  }

  if (chosen_lambda) *chosen_lambda = best_lambda;
  return fit_lasso(X, y, best_lambda);
}

namespace {

struct TreeBuilder {
  std::span<const std::vector<double>> X;
  std::span<const double> y;
  const ModelSpec& spec;
  bool linear_leaves;

  std::unique_ptr<RegressionTree::Node> build(std::vector<int> rows, int depth) {
    auto node = std::make_unique<RegressionTree::Node>();
    node->n_rows = static_cast<int>(rows.size());

    double sum = 0;
    for (int i : rows) sum += y[i];
    node->mean = sum / static_cast<double>(rows.size());
    double sse = 0;
    for (int i : rows) sse += (y[i] - node->mean) * (y[i] - node->mean);

    bool splittable = depth < spec.max_depth &&
                      static_cast<int>(rows.size()) >= 2 * spec.min_leaf && sse > 1e-12;
    int best_feature = -1;
    double best_threshold = 0;
    double best_children_sse = 0;
    if (splittable) {
      const auto p = X[rows[0]].size();
      double best_sse = std::numeric_limits<double>::infinity();
      std::vector<int> sorted = rows;
      for (std::size_t j = 0; j < p; ++j) {
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
          if (X[a][j] != X[b][j]) return X[a][j] < X[b][j];
          return a < b;
        });
        double left_sum = 0, left_sq = 0;
        double total_sq = 0;
        for (int i : sorted) total_sq += y[i] * y[i];
        const auto m = sorted.size();
        for (std::size_t t = 0; t + 1 < m; ++t) {
          int i = sorted[t];
          left_sum += y[i];
          left_sq += y[i] * y[i];
          if (X[sorted[t]][j] == X[sorted[t + 1]][j]) continue;
          std::size_t left_n = t + 1, right_n = m - left_n;
          if (left_n < static_cast<std::size_t>(spec.min_leaf) ||
              right_n < static_cast<std::size_t>(spec.min_leaf))
            continue;
          double right_sum = sum - left_sum;
          double right_sq = total_sq - left_sq;
          double children =
              (left_sq - left_sum * left_sum / static_cast<double>(left_n)) +
              (right_sq - right_sum * right_sum / static_cast<double>(right_n));
          if (children < best_sse) {  // ties keep lowest feature, smallest threshold
            best_sse = children;
            best_feature = static_cast<int>(j);
            best_threshold = (X[sorted[t]][j] + X[sorted[t + 1]][j]) / 2.0;
            best_children_sse = children;
          }
        }
      }
      if (best_feature != -1 && sse - best_children_sse <= 1e-12) best_feature = -1;
    }

    if (best_feature == -1) {
      if (linear_leaves && static_cast<int>(rows.size()) >= spec.linear_leaf_min) {
        std::vector<std::vector<double>> leaf_x;
        std::vector<double> leaf_y;
        leaf_x.reserve(rows.size());
        for (int i : rows) {
          leaf_x.push_back(X[i]);
          leaf_y.push_back(y[i]);
        }
        node->leaf_model = fit_lr(leaf_x, leaf_y);
      }
      return node;
    }

    node->feature = best_feature;
    node->threshold = best_threshold;
    node->split_gain = sse - best_children_sse;
    std::vector<int> left, right;
    for (int i : rows) (X[i][best_feature] <= best_threshold ? left : right).push_back(i);
    node->left = build(std::move(left), depth + 1);
    node->right = build(std::move(right), depth + 1);
    return node;
  }
};

}  // namespace

RegressionTree RegressionTree::fit(std::span<const std::vector<double>> X,
                                   std::span<const double> y, const ModelSpec& spec,
                                   bool linear_leaves) {
  RegressionTree tree;
  std::vector<int> rows(X.size());
  std::iota(rows.begin(), rows.end(), 0);
  TreeBuilder builder{X, y, spec, linear_leaves};
  tree.root_ = builder.build(std::move(rows), 0);
  return tree;
}

const RegressionTree::Node* RegressionTree::leaf_for(std::span<const double> x) const {
  const Node* node = root_.get();
  while (node->feature != -1)
    node = x[node->feature] <= node->threshold ? node->left.get() : node->right.get();
  return node;
}

double RegressionTree::predict(std::span<const double> x) const {
  const Node* leaf = leaf_for(x);
  return leaf->leaf_model ? leaf->leaf_model->predict(x) : leaf->mean;
}

std::map<int, RegressionTree::FeatureUse> RegressionTree::feature_importance() const {
  std::map<int, FeatureUse> uses;
  std::vector<const Node*> stack{root_.get()};
  while (!stack.empty()) {
    const Node* node = stack.back();
    stack.pop_back();
    if (node->feature == -1) continue;
    auto& use = uses[node->feature];
    ++use.splits;
    use.sse_reduction += node->split_gain;
    stack.push_back(node->left.get());
    stack.push_back(node->right.get());
  }
  return uses;
}

namespace {

void dump_node(std::ostream& out, const RegressionTree::Node& node,
               std::span<const std::string> names, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.feature == -1) {
    out << pad << "predict ";
    if (node.leaf_model) {
      out << format_double(node.leaf_model->intercept);
      for (std::size_t j = 0; j < node.leaf_model->coef.size(); ++j) {
        double c = node.leaf_model->coef[j];
        if (c == 0.0) continue;
        out << (c < 0 ? " - " : " + ") << format_double(std::abs(c)) << "*"
            << (j < names.size() ? names[j] : "x" + std::to_string(j));
      }
      out << "  [linear, n=" << node.n_rows << "]\n";
    } else {
      out << format_double(node.mean) << "  [mean, n=" << node.n_rows << "]\n";
    }
    return;
  }
  std::string name =
      node.feature < static_cast<int>(names.size()) ? names[node.feature]
                                                    : "x" + std::to_string(node.feature);
  out << pad << "if " << name << " <= " << format_double(node.threshold) << "  [n="
      << node.n_rows << ", gain=" << format_double(node.split_gain) << "]\n";
  dump_node(out, *node.left, names, indent + 1);
  out << pad << "else\n";
  dump_node(out, *node.right, names, indent + 1);
}

}  // namespace

void RegressionTree::dump(std::ostream& out, std::span<const std::string> feature_names) const {
  dump_node(out, *root_, feature_names, 0);
}

const char* category_name(Category c) {
  switch (c) {
    case Category::NotFree: return "NotFree";
    case Category::PartlyFree: return "PartlyFree";
    case Category::Free: return "Free";
  }
  return "NotFree";
}

Category categorize(double y) {
  if (y < 0.0 || y > 100.0 || std::isnan(y))
    throw std::domain_error("category scale is [0,100], got " + format_double(y));
  if (y <= 30.0) return Category::NotFree;
  if (y <= 60.0) return Category::PartlyFree;
  return Category::Free;
}

PredictionReport loocv(const Dataset& data, const ModelSpec& spec) {
  PredictionReport report;
  report.kind = spec.kind;
  const auto n = data.rows.size();
  const auto p = n > 0 ? data.rows[0].x.size() : 0;

  for (std::size_t hold = 0; hold < n; ++hold) {
    std::vector<std::vector<double>> train_x;
    std::vector<double> train_y;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == hold || data.rows[i].train_excluded) continue;
      train_x.push_back(data.rows[i].x);
      train_y.push_back(data.rows[i].y);
    }

    const DataRow& row = data.rows[hold];
    double predicted = 0;
    bool failed = false;
    if (train_y.empty()) {
      failed = true;
      predicted = 50.0;
    } else {
      switch (spec.kind) {
        case ModelKind::LR:
          if (train_x.size() < 2 * p) {
            failed = true;
            predicted = mean_of(train_y);
          } else {
            try {
              predicted = fit_lr(train_x, train_y).predict(row.x);
            } catch (const DegenerateFit&) {
              failed = true;
              predicted = mean_of(train_y);
            }
          }
          break;
        case ModelKind::LASSO:
          predicted = fit_lasso_cv(train_x, train_y, spec).predict(row.x);
          break;
        case ModelKind::DTLA:
          predicted = RegressionTree::fit(train_x, train_y, spec, false).predict(row.x);
          break;
        case ModelKind::DTLR:
          predicted = RegressionTree::fit(train_x, train_y, spec, true).predict(row.x);
          break;
      }
    }
    if (!std::isfinite(predicted)) {
      failed = true;
      predicted = train_y.empty() ? 50.0 : mean_of(train_y);
    }
    predicted = std::clamp(predicted, 0.0, 100.0);

    PredictionRow out;
    out.country = row.country;
    out.actual = row.y;
    out.predicted = predicted;
    out.abs_error = std::abs(predicted - row.y);
    out.ratio = row.y != 0.0 ? predicted / row.y : std::numeric_limits<double>::quiet_NaN();
    out.actual_cat = categorize(row.y);
    out.predicted_cat = categorize(predicted);
    out.train_excluded = row.train_excluded;
    out.fold_failed = failed;
    report.rows.push_back(std::move(out));

    if (failed) ++report.fold_failures;
    else ++report.models_trained;
  }

  double abs_sum = 0, norm_sum = 0;
  std::size_t norm_count = 0;
  for (const auto& r : report.rows) {
    abs_sum += r.abs_error;
    if (r.actual > 0) {
      norm_sum += r.abs_error / r.actual;
      ++norm_count;
    }
  }
  report.mean_abs_error = report.rows.empty() ? 0 : abs_sum / static_cast<double>(n);
  report.mean_normalized_error = norm_count == 0 ? 0 : norm_sum / static_cast<double>(norm_count);

  CategoryMetrics metrics = category_metrics(report);
  report.accuracy3 = metrics.accuracy3;
  report.accuracy_merged = metrics.accuracy_merged;
  return report;
}

std::vector<std::size_t> PredictionReport::residual_ranking() const {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].abs_error != rows[b].abs_error) return rows[a].abs_error > rows[b].abs_error;
    return rows[a].country < rows[b].country;
  });
  return order;
}

CategoryMetrics category_metrics(const PredictionReport& report) {
  CategoryMetrics m;
  int correct3 = 0, correct_merged = 0;
  for (const auto& r : report.rows) {
    int a = static_cast<int>(r.actual_cat);
    int p = static_cast<int>(r.predicted_cat);
    ++m.confusion[a][p];
    if (a == p) ++correct3;
    bool a_not_free = r.actual_cat == Category::NotFree;
    bool p_not_free = r.predicted_cat == Category::NotFree;
    if (a_not_free == p_not_free) ++correct_merged;
  }
  const auto total = report.rows.size();
  m.accuracy3 = total == 0 ? 0 : static_cast<double>(correct3) / static_cast<double>(total);
  m.accuracy_merged =
      total == 0 ? 0 : static_cast<double>(correct_merged) / static_cast<double>(total);
  return m;
}

}  // namespace freetopo
