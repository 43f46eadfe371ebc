#pragma once

// Test-side numerical oracles, independent of the library implementations
// they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "salience/random.hpp"

namespace salience::testing {

// Marsaglia-Tsang gamma sampler (shape >= 0 via the boost trick).
inline double sample_gamma(RandomStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = std::max(rng.uniform(), 1e-300);
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

inline double sample_beta(RandomStream& rng, double a, double b) {
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  return x / (x + y);
}

// Beta-binomial draw with mean mu and dispersion phi (rho = phi/(1+phi)).
inline int sample_beta_binomial(RandomStream& rng, double mu, double phi,
                                int trials) {
  double p = mu;
  if (phi > 0) {
    const double s = 1.0 / phi;
    p = sample_beta(rng, mu * s, (1.0 - mu) * s);
  }
  int k = 0;
  for (int t = 0; t < trials; ++t) {
    if (rng.uniform() < p) ++k;
  }
  return k;
}

// One-sample Kolmogorov-Smirnov test against U(0,1); returns the asymptotic
// p-value.
inline double ks_uniform_pvalue(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = samples[i];
    d = std::max(d, std::abs((i + 1.0) / n - cdf));
    d = std::max(d, std::abs(cdf - i / n));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0;
  for (int j = 1; j <= 100; ++j) {
    p += 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
         std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

// Plain logistic regression MLE via Newton iterations (reference for the
// phi = 0, n = 1 beta-binomial special case).
inline Eigen::VectorXd logistic_mle(const Eigen::MatrixXd& X,
                                    const std::vector<int>& y) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(X.cols());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      grad += (y[i] - mu[i]) * X.row(i).transpose();
      hess += mu[i] * (1.0 - mu[i]) * X.row(i).transpose() * X.row(i);
    }
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    beta += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-12) break;
  }
  return beta;
}

// Seeded k-means with k-means++ init and restarts.
inline std::vector<int> kmeans(const Eigen::MatrixXd& points, int k,
                               RandomStream& rng, int restarts = 10) {
  const Eigen::Index n = points.rows();
  std::vector<int> best_assign(n, 0);
  double best_cost = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    std::vector<Eigen::VectorXd> centers;
    centers.push_back(points.row(rng.below(n)).transpose());
    while (static_cast<int>(centers.size()) < k) {
      std::vector<double> d2(n);
      double total = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) {
          best = std::min(best,
                          (points.row(i).transpose() - c).squaredNorm());
        }
        d2[i] = best;
        total += best;
      }
      double target = rng.uniform() * total;
      Eigen::Index pick = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0) {
          pick = i;
          break;
        }
      }
      centers.push_back(points.row(pick).transpose());
    }
    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d =
              (points.row(i).transpose() - centers[c]).squaredNorm();
          if (d < bd) {
            bd = d;
            best = c;
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      for (int c = 0; c < k; ++c) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(points.cols());
        int count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (assign[i] == c) {
            sum += points.row(i).transpose();
            ++count;
          }
        }
        if (count > 0) centers[c] = sum / count;
      }
      if (!changed) break;
    }
    double cost = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cost += (points.row(i).transpose() - centers[assign[i]]).squaredNorm();
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_assign = assign;
    }
  }
  return best_assign;
}

// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  const int ka = 1 + *std::max_element(a.begin(), a.end());
  const int kb = 1 + *std::max_element(b.begin(), b.end());
  std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0));
  for (std::size_t i = 0; i < a.size(); ++i) table[a[i]][b[i]] += 1;
  auto choose2 = [](double x) { return x * (x - 1) / 2.0; };
  double sum_cells = 0, sum_rows = 0, sum_cols = 0;
  for (int i = 0; i < ka; ++i) {
    double row = 0;
    for (int j = 0; j < kb; ++j) {
      sum_cells += choose2(table[i][j]);
      row += table[i][j];
    }
    sum_rows += choose2(row);
  }
  for (int j = 0; j < kb; ++j) {
    double col = 0;
    for (int i = 0; i < ka; ++i) col += table[i][j];
    sum_cols += choose2(col);
  }
  const double n = static_cast<double>(a.size());
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = (sum_rows + sum_cols) / 2.0;
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

// Two interleaving half-circles with Gaussian noise.
inline void two_moons(RandomStream& rng, int n, double noise,
                      Eigen::MatrixXd& X, std::vector<int>& y) {
  X.resize(n, 2);
  y.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform() * M_PI;
    if (i % 2 == 0) {
      X(i, 0) = std::cos(t) + rng.normal() * noise;
      X(i, 1) = std::sin(t) + rng.normal() * noise;
      y[i] = 0;
    } else {
      X(i, 0) = 1.0 - std::cos(t) + rng.normal() * noise;
      X(i, 1) = 0.5 - std::sin(t) + rng.normal() * noise;
      y[i] = 1;
    }
  }
}

}  // namespace salience::testing
