#ifndef FREETOPO_ML_HPP
#define FREETOPO_ML_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freetopo/common.hpp"

namespace freetopo {

struct DataRow {
  std::string country;
  std::vector<double> x;  // scaled features
  double y = 0;           // 100 - fpi, higher = freer
  bool train_excluded = false;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<DataRow> rows;
};

enum class ModelKind { LR, LASSO, DTLA, DTLR };

const char* model_kind_name(ModelKind k);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::DTLR;
  int min_leaf = 5;
  int max_depth = 6;
  int linear_leaf_min = 10;  // leaves at least this big get a linear model
  int lasso_grid = 60;       // lambda grid points
  double lasso_decades = 3;  // grid spans lambda_max down this many decades
  int cv_folds = 5;
  std::uint64_t seed = 42;
};

struct LinearModel {
  double intercept = 0;
  std::vector<double> coef;

  double predict(std::span<const double> x) const;
};

class DegenerateFit : public std::runtime_error {
 public:
  explicit DegenerateFit(const std::string& msg) : std::runtime_error(msg) {}
};

// Ordinary least squares with intercept. Rank-deficient designs refit with a
// 1e-8 ridge jitter on the non-intercept coefficients. Throws DegenerateFit
// (advising LASSO) when there are not even two rows.
LinearModel fit_lr(std::span<const std::vector<double>> X, std::span<const double> y);

// Coordinate descent on (1/2n)*RSS + lambda*||w||_1, intercept unpenalized.
// Sweeps continue until the objective improves by less than 1e-7 and no
// coefficient moved more than 1e-10. The per-sweep objective trace is
// exposed for the monotonicity property.
LinearModel fit_lasso(std::span<const std::vector<double>> X, std::span<const double> y,
                      double lambda, std::vector<double>* objective_trace = nullptr);

// Smallest lambda that zeroes every coefficient.
double lasso_lambda_max(std::span<const std::vector<double>> X, std::span<const double> y);

// Lambda chosen by seeded k-fold cross-validation over a geometric grid from
// lambda_max down `lasso_decades` decades; ties prefer the sparser (larger)
// lambda.
LinearModel fit_lasso_cv(std::span<const std::vector<double>> X, std::span<const double> y,
                         const ModelSpec& spec, double* chosen_lambda = nullptr);

// CART regression tree, binary splits minimizing within-group squared error.
// Candidate thresholds are midpoints between consecutive distinct sorted
// values; both children must keep min_leaf rows. Deterministic tie-break:
// lowest feature index, then smallest threshold. With linear leaves enabled,
// a leaf holding at least linear_leaf_min rows fits an OLS model (ridge
// jitter on rank deficiency), smaller leaves keep the mean.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0;
    std::unique_ptr<Node> left, right;  // left: x[feature] <= threshold
    double mean = 0;
    int n_rows = 0;
    double split_gain = 0;  // squared-error reduction of this split
    std::optional<LinearModel> leaf_model;
  };

  static RegressionTree fit(std::span<const std::vector<double>> X,
                            std::span<const double> y, const ModelSpec& spec,
                            bool linear_leaves);

  double predict(std::span<const double> x) const;
  const Node* leaf_for(std::span<const double> x) const;
  const Node& root() const { return *root_; }

  // Total squared-error reduction and split count per feature.
  struct FeatureUse {
    int splits = 0;
    double sse_reduction = 0;
  };
  std::map<int, FeatureUse> feature_importance() const;

  void dump(std::ostream& out, std::span<const std::string> feature_names) const;

 private:
  std::unique_ptr<Node> root_;
};

enum class Category { NotFree, PartlyFree, Free };

const char* category_name(Category c);

// On the 100-fpi scale: y <= 30 NotFree, 30 < y <= 60 PartlyFree, y > 60
// Free. Throws std::domain_error outside [0,100].
Category categorize(double y);

struct PredictionRow {
  std::string country;
  double actual = 0;
  double predicted = 0;
  double abs_error = 0;
  double ratio = 0;  // predicted / actual; NaN when actual is 0
  Category actual_cat = Category::NotFree;
  Category predicted_cat = Category::NotFree;
  bool train_excluded = false;
  bool fold_failed = false;
};

struct PredictionReport {
  ModelKind kind = ModelKind::DTLR;
  std::vector<PredictionRow> rows;
  int models_trained = 0;
  int fold_failures = 0;
  double mean_abs_error = 0;        // points on the 100-point scale == percent of scale
  double mean_normalized_error = 0; // mean |pred - actual| / actual, rows with actual > 0
  double accuracy3 = 0;
  double accuracy_merged = 0;

  // Countries ordered by descending absolute error.
  std::vector<std::size_t> residual_ranking() const;
};

// Leave-one-out cross-validation: every row is predicted by a model trained
// on all other non-excluded rows; train-excluded rows are still predicted as
// held-out points. Predictions clamp to [0,100]. A LOOCV fold whose training
// set is too small for LR is recorded as a fold failure, not a crash.
PredictionReport loocv(const Dataset& data, const ModelSpec& spec);

struct CategoryMetrics {
  int confusion[3][3] = {};  // [actual][predicted]
  double accuracy3 = 0;
  double accuracy_merged = 0;  // Free and PartlyFree treated as one label
};

CategoryMetrics category_metrics(const PredictionReport& report);

}  // namespace freetopo

#endif  // FREETOPO_ML_HPP
