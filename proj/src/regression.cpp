#include "salience/regression.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "json.hpp"
#include "salience/csv.hpp"
#include "salience/errors.hpp"
#include "salience/stats.hpp"

namespace salience::regression {

using features::Column;
using features::ColumnKind;
using features::FeatureTable;
using nlohmann::json;

DesignSpec make_design_spec(const FeatureTable& table,
                            const std::vector<std::string>& terms) {
  DesignSpec spec;
  spec.col_names.push_back("(intercept)");
  for (const auto& name : terms) {
    const Column& c = table.column(name);
    TermEncoding enc;
    enc.term = name;
    enc.kind = c.kind;
    enc.first_col = static_cast<int>(spec.col_names.size());
    if (c.kind == ColumnKind::Categorical) {
      std::vector<std::size_t> counts(c.levels.size(), 0);
      for (int v : c.cat) ++counts[v];
      const std::size_t ref = static_cast<std::size_t>(std::distance(
          counts.begin(), std::max_element(counts.begin(), counts.end())));
      enc.reference = c.levels[ref];
      for (std::size_t l = 0; l < c.levels.size(); ++l) {
        if (l == ref || counts[l] == 0) continue;
        enc.levels.push_back(c.levels[l]);
        spec.col_names.push_back(name + "=" + c.levels[l]);
      }
      enc.n_cols = static_cast<int>(enc.levels.size());
    } else {
      enc.n_cols = 1;
      spec.col_names.push_back(name);
    }
    spec.terms.push_back(std::move(enc));
  }
  spec.n_cols = static_cast<int>(spec.col_names.size());
  return spec;
}

Eigen::MatrixXd design_matrix(const DesignSpec& spec,
                              const FeatureTable& table) {
  const std::size_t n = table.rows();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, spec.n_cols);
  X.col(0).setOnes();
  for (const auto& enc : spec.terms) {
    const Column& c = table.column(enc.term);
    if (c.kind != enc.kind)
      throw DataError("schema mismatch: column \"" + enc.term +
                      "\" changed kind");
    switch (enc.kind) {
      case ColumnKind::Numeric:
        for (std::size_t i = 0; i < n; ++i) X(i, enc.first_col) = c.num[i];
        break;
      case ColumnKind::Boolean:
        for (std::size_t i = 0; i < n; ++i) X(i, enc.first_col) = c.flag[i];
        break;
      case ColumnKind::Categorical: {
        std::map<std::string, int> offset;
        for (std::size_t l = 0; l < enc.levels.size(); ++l)
          offset[enc.levels[l]] = static_cast<int>(l);
        for (std::size_t i = 0; i < n; ++i) {
          auto it = offset.find(c.level_of(i));
          // Reference and fit-time-unseen levels encode as all zeros.
          if (it != offset.end()) X(i, enc.first_col + it->second) = 1.0;
        }
        break;
      }
    }
  }
  return X;
}

namespace {

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}

// Per-row mass and its partial derivatives. With s = 1/phi the
// beta-binomial log-mass is
//   ln C(n,k) + sum_{j<k} ln(mu*s + j) + sum_{j<n-k} ln((1-mu)*s + j)
//             - sum_{j<n} ln(s + j),
// a finite sum because the trial count is small. No lgamma differences,
// so it stays exact as phi -> 0.
struct RowLik {
  double ll = 0;
  double d_eta = 0;  // d ll / d eta, eta = x beta
  double d_tau = 0;  // d ll / d tau, phi = exp(tau)
};

RowLik row_loglik(double eta, double phi, int k, int n, bool with_grad) {
  const double mu = sigmoid(eta);
  RowLik out;
  out.ll = log_choose(n, k);
  if (phi <= 0) {
    // Binomial limit.
    out.ll += k * std::log(mu) + (n - k) * std::log1p(-mu);
    if (with_grad) {
      out.d_eta = k - n * mu;
      out.d_tau = 0;
    }
    return out;
  }
  const double s = 1.0 / phi;
  double d_mu = 0, d_s = 0;
  for (int j = 0; j < k; ++j) {
    const double a = mu * s + j;
    out.ll += std::log(a);
    if (with_grad) {
      d_mu += s / a;
      d_s += mu / a;
    }
  }
  for (int j = 0; j < n - k; ++j) {
    const double b = (1.0 - mu) * s + j;
    out.ll += std::log(b);
    if (with_grad) {
      d_mu -= s / b;
      d_s += (1.0 - mu) / b;
    }
  }
  for (int j = 0; j < n; ++j) {
    out.ll -= std::log(s + j);
    if (with_grad) d_s -= 1.0 / (s + j);
  }
  if (with_grad) {
    out.d_eta = d_mu * mu * (1.0 - mu);
    out.d_tau = -s * d_s;  // ds/dtau = -s
  }
  return out;
}

void check_targets(const std::vector<int>& y, int trials) {
  for (int v : y) {
    if (v < 0 || v > trials)
      throw DataError("target " + std::to_string(v) + " outside [0, " +
                      std::to_string(trials) + "]");
  }
}

void check_rank(const Eigen::MatrixXd& X,
                const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  if (rank == X.cols()) return;
  // Columns permuted past the rank are the aliased ones.
  const auto perm = qr.colsPermutation().indices();
  std::string aliased;
  for (int i = rank; i < X.cols(); ++i) {
    if (!aliased.empty()) aliased += ", ";
    aliased += names[perm[i]];
  }
  throw ModelError("rank-deficient design; aliased columns: " + aliased);
}

struct Objective {
  const Eigen::MatrixXd& X;
  const std::vector<int>& y;
  int trials;

  std::pair<double, Eigen::VectorXd> eval(const Eigen::VectorXd& theta) const {
    return loglik_and_gradient(theta, X, y, trials);
  }
};

}  // namespace

double loglik_at(const Eigen::VectorXd& beta, double phi,
                 const Eigen::MatrixXd& X, const std::vector<int>& y,
                 int trials) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += row_loglik(eta[i], phi, y[i], trials, false).ll;
  }
  return ll;
}

std::pair<double, Eigen::VectorXd> loglik_and_gradient(
    const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
    const std::vector<int>& y, int trials) {
  const int p = static_cast<int>(X.cols());
  const Eigen::VectorXd beta = theta.head(p);
  const double phi = std::exp(theta[p]);
  const Eigen::VectorXd eta = X * beta;
  double ll = 0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p + 1);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const RowLik row = row_loglik(eta[i], phi, y[i], trials, true);
    ll += row.ll;
    grad.head(p) += row.d_eta * X.row(i).transpose();
    grad[p] += row.d_tau;
  }
  return {ll, grad};
}

namespace {

struct OptimResult {
  Eigen::VectorXd theta;
  double loglik = 0;
  int iterations = 0;
  double grad_norm = 0;
  bool converged = false;
};

// BFGS maximization with Armijo backtracking. The line search only accepts
// ascent steps, so the log-likelihood is non-decreasing across iterations.
OptimResult maximize(const Objective& obj, Eigen::VectorXd theta,
                     const FitConfig& cfg,
                     const std::vector<std::string>& coef_names) {
  const int dim = static_cast<int>(theta.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);
  auto [ll, grad] = obj.eval(theta);
  if (!std::isfinite(ll))
    throw ModelError("log-likelihood not finite at the starting point");

  OptimResult res;
  res.theta = theta;
  res.loglik = ll;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < cfg.grad_tol) {
      res.converged = true;
      res.iterations = iter;
      return res;
    }
    Eigen::VectorXd dir = H * grad;
    double slope = grad.dot(dir);
    if (slope <= 0) {  // reset when curvature information degraded
      H.setIdentity();
      dir = grad;
      slope = grad.dot(dir);
    }
    double step = 1.0;
    double new_ll = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd new_theta;
    Eigen::VectorXd new_grad;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      new_theta = res.theta + step * dir;
      auto [cand_ll, cand_grad] = obj.eval(new_theta);
      if (std::isfinite(cand_ll) &&
          cand_ll >= res.loglik + 1e-4 * step * slope) {
        new_ll = cand_ll;
        new_grad = std::move(cand_grad);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent step representable; treat as converged-at-tolerance or
      // fail loudly below via the gradient-norm check.
      res.iterations = iter;
      return res;
    }
    for (int j = 0; j < dim - 1; ++j) {
      if (std::abs(new_theta[j]) > cfg.coef_guard) {
        throw ModelError(
            "separation: coefficient " + coef_names[j] +
            " diverged (|beta| > " + format_double(cfg.coef_guard) + ")");
      }
    }
    const Eigen::VectorXd s = new_theta - res.theta;
    const Eigen::VectorXd yv = grad - new_grad;  // gradient of -ll increases
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
      const double rho = 1.0 / sy;
      H = (I - rho * s * yv.transpose()) * H *
              (I - rho * yv * s.transpose()) +
          rho * s * s.transpose();
    }
    res.theta = new_theta;
    res.loglik = new_ll;
    grad = std::move(new_grad);
    res.iterations = iter + 1;
  }
  res.grad_norm = grad.lpNorm<Eigen::Infinity>();
  res.converged = res.grad_norm < cfg.grad_tol;
  return res;
}

BetaBinomialModel fit_with_spec(const DesignSpec& spec,
                                const FeatureTable& table, int trials,
                                const FitConfig& cfg) {
  if (table.rows() == 0) throw DataError("empty feature table");
  check_targets(table.target, trials);
  const Eigen::MatrixXd X = design_matrix(spec, table);
  check_rank(X, spec.col_names);

  Objective obj{X, table.target, trials};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.n_cols + 1);
  theta[spec.n_cols] = std::log(cfg.init_phi);
  const OptimResult res = maximize(obj, theta, cfg, spec.col_names);
  if (!res.converged) {
    throw ModelError("beta-binomial fit did not converge: gradient max-norm " +
                     format_double(res.grad_norm) + " after " +
                     std::to_string(res.iterations) + " iterations");
  }

  BetaBinomialModel model;
  model.design = spec;
  model.coef = res.theta.head(spec.n_cols);
  model.phi = std::exp(res.theta[spec.n_cols]);
  model.trials = trials;
  model.loglik = res.loglik;
  model.aic = 2.0 * model.n_parameters() - 2.0 * model.loglik;
  model.iterations = res.iterations;
  model.grad_norm = res.grad_norm;
  model.converged = res.converged;
  return model;
}

}  // namespace

BetaBinomialModel fit(const FeatureTable& table,
                      const std::vector<std::string>& terms, int trials,
                      const FitConfig& cfg) {
  return fit_with_spec(make_design_spec(table, terms), table, trials, cfg);
}

AnovaTable anova_single_term_deletions(const BetaBinomialModel& model,
                                       const FeatureTable& table,
                                       const FitConfig& cfg, int threads) {
  std::vector<std::string> full_terms;
  for (const auto& t : model.design.terms) full_terms.push_back(t.term);

  auto fit_without = [&](std::size_t drop) {
    std::vector<std::string> reduced;
    for (std::size_t i = 0; i < full_terms.size(); ++i) {
      if (i != drop) reduced.push_back(full_terms[i]);
    }
    try {
      return fit(table, reduced, model.trials, cfg);
    } catch (const ModelError& e) {
      throw ModelError("single-term deletion of \"" + full_terms[drop] +
                       "\": " + e.what());
    }
  };

  std::vector<BetaBinomialModel> reduced(full_terms.size());
  if (threads > 1) {
    std::vector<std::future<BetaBinomialModel>> futs;
    for (std::size_t i = 0; i < full_terms.size(); ++i) {
      futs.push_back(
          std::async(std::launch::async, [&, i] { return fit_without(i); }));
    }
    for (std::size_t i = 0; i < futs.size(); ++i) reduced[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < full_terms.size(); ++i) {
      reduced[i] = fit_without(i);
    }
  }

  AnovaTable out;
  out.rows.push_back({"<none>", 0, model.aic, 0,
                      std::numeric_limits<double>::quiet_NaN()});
  for (std::size_t i = 0; i < full_terms.size(); ++i) {
    AnovaRow row;
    row.term = full_terms[i];
    row.df = model.design.terms[i].df();
    row.aic = reduced[i].aic;
    row.lrt = 2.0 * (model.loglik - reduced[i].loglik);
    row.p = row.df > 0 ? stats::chi2_sf(row.lrt, row.df) : 1.0;
    out.rows.push_back(row);
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const AnovaRow& a, const AnovaRow& b) {
                     return a.aic < b.aic;
                   });
  return out;
}

std::string anova_csv(const AnovaTable& table) {
  CsvWriter w;
  w.row("term", "df", "aic", "lrt", "p", "signif");
  for (const auto& row : table.rows) {
    if (row.term == "<none>") {
      w.row(row.term, "", format_double(row.aic), "", "", "");
    } else {
      w.row(row.term, row.df, format_double(row.aic), format_double(row.lrt),
            stats::format_pvalue(row.p), stats::significance_stars(row.p));
    }
  }
  return w.str();
}

Eigen::VectorXd predict_mu(const BetaBinomialModel& model,
                           const FeatureTable& table) {
  const Eigen::MatrixXd X = design_matrix(model.design, table);
  Eigen::VectorXd mu = X * model.coef;
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = sigmoid(mu[i]);
  return mu;
}

double prob_zero(double mu, double phi, int trials) {
  if (phi <= 0) return std::pow(1.0 - mu, trials);
  const double s = 1.0 / phi;
  double log_p = 0;
  for (int j = 0; j < trials; ++j) {
    log_p += std::log((1.0 - mu) * s + j) - std::log(s + j);
  }
  return std::exp(log_p);
}

EvalReport evaluate(const BetaBinomialModel& model,
                    const FeatureTable& table) {
  if (table.rows() == 0) throw DataError("empty feature table");
  check_targets(table.target, model.trials);
  const Eigen::VectorXd mu = predict_mu(model, table);
  const double n_trials = model.trials;

  EvalReport rep;
  rep.n = table.rows();
  double se = 0, se_base = 0;
  const double mean_y =
      std::accumulate(table.target.begin(), table.target.end(), 0.0) /
      static_cast<double>(table.rows());
  std::size_t correct = 0, correct_mu = 0, salient = 0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const double expectation = n_trials * mu[i];
    const double err = expectation - table.target[i];
    se += err * err;
    const double base_err = mean_y - table.target[i];
    se_base += base_err * base_err;

    const bool truth = table.target[i] > 0;
    if (truth) ++salient;
    const bool pred = 1.0 - prob_zero(mu[i], model.phi, model.trials) > 0.5;
    if (pred == truth) ++correct;
    const bool pred_mu = expectation >= 0.5;
    if (pred_mu == truth) ++correct_mu;
  }
  const double n = static_cast<double>(table.rows());
  rep.rmse = std::sqrt(se / n);
  rep.rmse_mean_baseline = std::sqrt(se_base / n);
  rep.accuracy = correct / n;
  rep.accuracy_mu_rule = correct_mu / n;
  rep.majority_baseline =
      std::max(salient / n, 1.0 - salient / n);
  return rep;
}

std::string model_to_json(const BetaBinomialModel& model) {
  json root;
  root["model"] = "beta_binomial";
  root["trials"] = model.trials;
  root["phi"] = model.phi;
  root["loglik"] = model.loglik;
  root["aic"] = model.aic;
  root["iterations"] = model.iterations;
  root["grad_norm"] = model.grad_norm;
  root["converged"] = model.converged;
  auto coef = json::object();
  for (std::size_t i = 0; i < model.design.col_names.size(); ++i) {
    coef[model.design.col_names[i]] = model.coef[static_cast<Eigen::Index>(i)];
  }
  root["coefficients"] = std::move(coef);
  auto terms = json::array();
  for (const auto& t : model.design.terms) {
    json jt;
    jt["term"] = t.term;
    switch (t.kind) {
      case ColumnKind::Numeric: jt["kind"] = "numeric"; break;
      case ColumnKind::Categorical: jt["kind"] = "categorical"; break;
      case ColumnKind::Boolean: jt["kind"] = "boolean"; break;
    }
    jt["reference"] = t.reference;
    jt["levels"] = t.levels;
    jt["first_col"] = t.first_col;
    terms.push_back(std::move(jt));
  }
  root["terms"] = std::move(terms);
  root["col_names"] = model.design.col_names;
  return root.dump(2) + "\n";
}

BetaBinomialModel model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  if (root.value("model", "") != "beta_binomial")
    throw DataError("model json: not a beta_binomial model");
  BetaBinomialModel model;
  model.trials = root.at("trials").get<int>();
  model.phi = root.at("phi").get<double>();
  model.loglik = root.at("loglik").get<double>();
  model.aic = root.at("aic").get<double>();
  model.iterations = root.at("iterations").get<int>();
  model.grad_norm = root.at("grad_norm").get<double>();
  model.converged = root.at("converged").get<bool>();
  model.design.col_names =
      root.at("col_names").get<std::vector<std::string>>();
  model.design.n_cols = static_cast<int>(model.design.col_names.size());
  model.coef.resize(model.design.n_cols);
  const auto& coef = root.at("coefficients");
  for (std::size_t i = 0; i < model.design.col_names.size(); ++i) {
    model.coef[static_cast<Eigen::Index>(i)] =
        coef.at(model.design.col_names[i]).get<double>();
  }
  for (const auto& jt : root.at("terms")) {
    TermEncoding t;
    t.term = jt.at("term").get<std::string>();
    const std::string kind = jt.at("kind").get<std::string>();
    t.kind = kind == "numeric"       ? ColumnKind::Numeric
             : kind == "categorical" ? ColumnKind::Categorical
                                     : ColumnKind::Boolean;
    t.reference = jt.at("reference").get<std::string>();
    t.levels = jt.at("levels").get<std::vector<std::string>>();
    t.first_col = jt.at("first_col").get<int>();
    t.n_cols = t.kind == ColumnKind::Categorical
                   ? static_cast<int>(t.levels.size())
                   : 1;
    model.design.terms.push_back(std::move(t));
  }
  return model;
}

}  // namespace salience::regression
