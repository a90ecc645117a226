#pragma once

#include <vector>

#include "camarm/learn/autograd.hpp"

namespace camarm {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay: p <- p - lr * (wd * p + m_hat / (sqrt(v_hat) + eps)).
class AdamW {
 public:
  AdamW(const ParameterSet& params, AdamWConfig config);
  void step(ParameterSet& params);
  long steps() const { return t_; }
  AdamWConfig& config() { return config_; }

 private:
  AdamWConfig config_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

// Scales all gradients so their global L2 norm is at most max_norm; returns
// the norm before scaling.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace camarm
