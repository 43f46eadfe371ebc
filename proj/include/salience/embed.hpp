#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace salience::embed {

struct EmbedConfig {
  double perplexity = 30.0;     // must satisfy perplexity < (n - 1) / 3
  int iterations = 1000;
  double learning_rate = 200.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_iter = 250;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  std::uint64_t seed = 0;
};

struct EmbedResult {
  Eigen::MatrixXd y;               // n x 2 coordinates
  std::vector<double> kl_trace;    // KL(P || Q) per iteration, against the
                                   // unexaggerated P
};

// Exact t-SNE: per-point Gaussian bandwidths binary-searched to match the
// perplexity (tolerance 1e-5, 50 iterations), symmetrized affinities,
// Student-t low-dimensional kernel, gradient descent with momentum and
// per-parameter gains. O(n^2) memory and time.
EmbedResult tsne(const Eigen::MatrixXd& X, const EmbedConfig& cfg = {});

// Row-normalized conditional affinities (each row sums to 1) — exposed for
// verification.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& X,
                                       double perplexity);

}  // namespace salience::embed
