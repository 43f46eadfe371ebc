#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "salience/features.hpp"

namespace salience::regression {

// Design-matrix encoding of one model term. Categorical terms expand to
// treatment-coded indicators against the most frequent level.
struct TermEncoding {
  std::string term;
  features::ColumnKind kind = features::ColumnKind::Numeric;
  std::string reference;            // categorical only
  std::vector<std::string> levels;  // non-reference levels, design order
  int first_col = 0;                // column index in the design matrix
  int n_cols = 0;

  int df() const { return n_cols; }
};

struct DesignSpec {
  std::vector<std::string> col_names;  // includes "(intercept)" at 0
  std::vector<TermEncoding> terms;
  int n_cols = 0;
};

DesignSpec make_design_spec(const features::FeatureTable& table,
                            const std::vector<std::string>& terms);

// Rows encoded against the spec. Levels absent from the spec (including
// the reference) contribute all-zero indicators.
Eigen::MatrixXd design_matrix(const DesignSpec& spec,
                              const features::FeatureTable& table);

struct FitConfig {
  double grad_tol = 1e-6;  // max-norm convergence threshold
  int max_iter = 500;
  double coef_guard = 30.0;  // |beta| beyond this raises a separation error
  double init_phi = 0.1;
};

// Beta-binomial regression: y_i successes of n trials, logit mean link
// mu = sigmoid(X beta), dispersion rho = phi / (1 + phi). phi = 0
// degenerates to the binomial likelihood.
struct BetaBinomialModel {
  DesignSpec design;
  Eigen::VectorXd coef;
  double phi = 0;
  int trials = 0;
  double loglik = 0;
  double aic = 0;
  int iterations = 0;
  double grad_norm = 0;
  bool converged = false;

  int n_parameters() const { return static_cast<int>(coef.size()) + 1; }
};

// Exact log-likelihood at (beta, phi). Uses the rising-factorial form of
// the beta-binomial mass, which stays stable for phi spanning many orders
// of magnitude; phi = 0 evaluates the binomial likelihood.
double loglik_at(const Eigen::VectorXd& beta, double phi,
                 const Eigen::MatrixXd& X, const std::vector<int>& y,
                 int trials);

// Log-likelihood and analytic gradient in the optimizer parameterization
// theta = [beta..., tau] with phi = exp(tau).
std::pair<double, Eigen::VectorXd> loglik_and_gradient(
    const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
    const std::vector<int>& y, int trials);

// Maximum-likelihood fit via BFGS with backtracking line search. Throws
// ModelError on rank deficiency (naming aliased columns), separation, or
// non-convergence (reporting the final gradient norm).
BetaBinomialModel fit(const features::FeatureTable& table,
                      const std::vector<std::string>& terms, int trials,
                      const FitConfig& cfg = {});

struct AnovaRow {
  std::string term;  // "<none>" marks the full model
  int df = 0;
  double aic = 0;
  double lrt = 0;
  double p = 1;  // NaN for the full-model row
};

struct AnovaTable {
  std::vector<AnovaRow> rows;  // sorted by AIC ascending, as in the reports
};

// Likelihood-ratio tests for single term deletions; categorical terms drop
// all their levels together. `threads` > 1 refits deletions in parallel
// (results are identical to sequential execution).
AnovaTable anova_single_term_deletions(const BetaBinomialModel& model,
                                       const features::FeatureTable& table,
                                       const FitConfig& cfg = {},
                                       int threads = 1);

std::string anova_csv(const AnovaTable& table);

struct EvalReport {
  std::size_t n = 0;
  double rmse = 0;
  double rmse_mean_baseline = 0;  // predicting the table's mean salience
  double accuracy = 0;            // salient iff P(score > 0) > 0.5
  double accuracy_mu_rule = 0;    // salient iff n * mu >= 0.5
  double majority_baseline = 0;
};

// Fitted means per row.
Eigen::VectorXd predict_mu(const BetaBinomialModel& model,
                           const features::FeatureTable& table);

// P(score = 0 | mu, phi) under the fitted beta-binomial.
double prob_zero(double mu, double phi, int trials);

EvalReport evaluate(const BetaBinomialModel& model,
                    const features::FeatureTable& table);

std::string model_to_json(const BetaBinomialModel& model);
BetaBinomialModel model_from_json(const std::string& text);

}  // namespace salience::regression
