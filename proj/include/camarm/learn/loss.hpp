#pragma once

#include <vector>

#include "camarm/learn/policy.hpp"

namespace camarm {

struct LossWeights {
  double beta = 0.01;           // KL weight
  double lambda_smooth = 0.01;  // L1 first-difference weight
};

// Weighted components; total = mse + kl + smooth.
//   mse    = (1/H) sum_i ||q_hat_i - q*_i||^2
//   kl     = beta * KL(N(mu, sigma^2) || N(0, I))
//   smooth = lambda * sum_{i>=2} ||q_hat_i - q_hat_{i-1}||_1
struct LossParts {
  double total = 0.0;
  double mse = 0.0;
  double kl = 0.0;
  double smooth = 0.0;

  LossParts& operator+=(const LossParts& o);
  LossParts scaled(double s) const;
};

// The latent fed to the decoder is z = mu + exp(logvar / 2) * eps. An empty
// eps means z = mu.
struct LossGraph {
  Var total, mse, kl, smooth, pred, mu, logvar;
  LossParts parts;
};
LossGraph build_loss(Tape& t, Policy& policy, const Clip& clip, const std::vector<double>& eps,
                     const LossWeights& w, bool track);

// Components for one clip, no gradients.
LossParts evaluate_loss(const Policy& policy, const Clip& clip, const std::vector<double>& eps, const LossWeights& w);

// Adds weight * d(total)/d(theta, phi) into policy.params grads and returns
// the unweighted components.
LossParts accumulate_gradients(Policy& policy, const Clip& clip, const std::vector<double>& eps, const LossWeights& w,
                               double weight = 1.0);

// Closed-form pieces, usable as independent references.
double kl_standard_normal(const std::vector<double>& mu, const std::vector<double>& logvar);

}  // namespace camarm
