#include "camarm/learn/optimizer.hpp"

#include <cmath>

#include "camarm/arm/types.hpp"

namespace camarm {

AdamW::AdamW(const ParameterSet& params, AdamWConfig config) : config_(config) {
  for (const Parameter& p : params) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void AdamW::step(ParameterSet& params) {
  if (static_cast<std::size_t>(params.size()) != m_.size()) throw ValidationError("AdamW: parameter set changed");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (int i = 0; i < params.size(); ++i) {
    auto& val = params[i].value.data;
    const auto& g = params[i].grad.data;
    auto& m = m_[static_cast<std::size_t>(i)];
    auto& v = v_[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < val.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      const double upd = (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.eps);
      val[k] -= config_.lr * (config_.weight_decay * val[k] + upd);
    }
  }
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter& p : params)
    for (double g : p.grad.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter& p : params)
      for (double& g : p.grad.data) g *= s;
  }
  return norm;
}

}  // namespace camarm
