#include "salience/embed.hpp"

#include <cmath>

#include "salience/errors.hpp"
#include "salience/random.hpp"

namespace salience::embed {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd D = sq.replicate(1, X.rows()) +
                      sq.transpose().replicate(X.rows(), 1) -
                      2.0 * X * X.transpose();
  return D.cwiseMax(0.0);
}

// Shannon entropy (nats) and row affinities for one point at precision
// beta = 1 / (2 sigma^2).
double row_entropy(const Eigen::MatrixXd& D, Eigen::Index i, double beta,
                   Eigen::VectorXd& p_row) {
  const Eigen::Index n = D.rows();
  double sum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    p_row[j] = j == i ? 0.0 : std::exp(-beta * D(i, j));
    sum += p_row[j];
  }
  if (sum <= 0) {
    p_row.setZero();
    return 0;
  }
  double h = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    p_row[j] /= sum;
    if (p_row[j] > 0) h -= p_row[j] * std::log(p_row[j]);
  }
  return h;
}

}  // namespace

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& X,
                                       double perplexity) {
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd D = squared_distances(X);
  const double target = std::log(perplexity);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd p_row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double h = row_entropy(D, i, beta, p_row);
    for (int iter = 0; iter < 50 && std::abs(h - target) > 1e-5; ++iter) {
      if (h > target) {  // too diffuse: raise precision
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
      h = row_entropy(D, i, beta, p_row);
    }
    P.row(i) = p_row.transpose();
  }
  return P;
}

EmbedResult tsne(const Eigen::MatrixXd& X, const EmbedConfig& cfg) {
  const Eigen::Index n = X.rows();
  if (n < 10) throw DataError("tsne: need at least 10 rows");
  if (!X.allFinite()) throw DataError("tsne: non-finite input");
  if (cfg.perplexity <= 1.0 ||
      cfg.perplexity >= static_cast<double>(n - 1) / 3.0) {
    throw DataError("tsne: perplexity must lie in (1, (n-1)/3)");
  }
  if (cfg.iterations < 1) throw DataError("tsne: iterations must be >= 1");

  // Symmetrized joint affinities, floored for numeric stability.
  const Eigen::MatrixXd cond = conditional_affinities(X, cfg.perplexity);
  Eigen::MatrixXd P = (cond + cond.transpose()) / (2.0 * n);
  P = P.cwiseMax(1e-12);
  P.diagonal().setZero();

  auto rng = RandomStream::derive(cfg.seed, 0x7453);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = rng.normal() * 1e-2;
    y(i, 1) = rng.normal() * 1e-2;
  }
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);

  EmbedResult result;
  result.kl_trace.reserve(cfg.iterations);

  Eigen::MatrixXd Q(n, n), num(n, n);
  Eigen::MatrixXd grad(n, 2);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration =
        iter < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;

    // Student-t kernel in the embedding.
    const Eigen::VectorXd sq = y.rowwise().squaredNorm();
    num = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
          2.0 * y * y.transpose();
    num = (1.0 + num.cwiseMax(0.0).array()).inverse().matrix();
    num.diagonal().setZero();
    const double z = num.sum();
    Q = (num / z).cwiseMax(1e-12);

    double kl = 0;  // against the true (unexaggerated) P
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) kl += P(i, j) * std::log(P(i, j) / Q(i, j));
      }
    }
    result.kl_trace.push_back(kl);

    // grad_i = 4 * sum_j (eP_ij - Q_ij) * num_ij * (y_i - y_j)
    const Eigen::MatrixXd W =
        ((exaggeration * P - Q).array() * num.array()).matrix();
    const Eigen::VectorXd row_sums = W.rowwise().sum();
    grad = 4.0 * (row_sums.asDiagonal() * y - W * y);

    const double momentum = iter < cfg.momentum_switch_iter
                                ? cfg.momentum_initial
                                : cfg.momentum_final;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign = (grad(i, d) > 0) == (velocity(i, d) > 0);
        gains(i, d) = same_sign ? std::max(gains(i, d) * 0.8, 0.01)
                                : gains(i, d) + 0.2;
        velocity(i, d) = momentum * velocity(i, d) -
                         cfg.learning_rate * gains(i, d) * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    y.rowwise() -= y.colwise().mean();  // keep the embedding centered
  }

  result.y = std::move(y);
  return result;
}

}  // namespace salience::embed
