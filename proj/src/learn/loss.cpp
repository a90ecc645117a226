#include "camarm/learn/loss.hpp"

#include <cmath>
#include <tuple>

namespace camarm {

LossParts& LossParts::operator+=(const LossParts& o) {
  total += o.total;
  mse += o.mse;
  kl += o.kl;
  smooth += o.smooth;
  return *this;
}

LossParts LossParts::scaled(double s) const { return {total * s, mse * s, kl * s, smooth * s}; }

LossGraph build_loss(Tape& t, Policy& policy, const Clip& clip, const std::vector<double>& eps, const LossWeights& w,
                     bool track) {
  const PolicyConfig& c = policy.config;
  if (static_cast<int>(clip.future.size()) != c.horizon) throw ValidationError("loss: clip horizon does not match policy");
  if (!eps.empty() && static_cast<int>(eps.size()) != c.d_z) throw ValidationError("loss: eps must have d_z entries");

  const Mat labels = action_labels(clip, c.ablation);
  LossGraph g;
  std::tie(g.mu, g.logvar) = policy.encode(t, labels, track);
  Var z = g.mu;
  if (!eps.empty()) {
    Mat e(1, c.d_z);
    std::copy(eps.begin(), eps.end(), e.data.begin());
    z = add(t, g.mu, mul(t, exp(t, scale(t, g.logvar, 0.5)), t.constant(std::move(e))));
  }
  g.pred = policy.decode(t, clip.obs_features, clip.obs_joints, clip.goal, z, track);
  g.mse = scale(t, sum_sq_diff(t, g.pred, labels), 1.0 / c.horizon);
  g.kl = scale(t, gaussian_kl(t, g.mu, g.logvar), w.beta);
  g.smooth = scale(t, row_diff_l1(t, g.pred), w.lambda_smooth);
  g.total = add_scalars(t, {g.mse, g.kl, g.smooth});
  g.parts.mse = t.value(g.mse).data[0];
  g.parts.kl = t.value(g.kl).data[0];
  g.parts.smooth = t.value(g.smooth).data[0];
  g.parts.total = t.value(g.total).data[0];
  return g;
}

LossParts evaluate_loss(const Policy& policy, const Clip& clip, const std::vector<double>& eps, const LossWeights& w) {
  Tape t;
  return build_loss(t, const_cast<Policy&>(policy), clip, eps, w, false).parts;
}

LossParts accumulate_gradients(Policy& policy, const Clip& clip, const std::vector<double>& eps, const LossWeights& w,
                               double weight) {
  Tape t;
  const LossGraph g = build_loss(t, policy, clip, eps, w, true);
  const Var seeded = scale(t, g.total, weight);
  t.backward(seeded);
  return g.parts;
}

double kl_standard_normal(const std::vector<double>& mu, const std::vector<double>& logvar) {
  if (mu.size() != logvar.size()) throw ValidationError("kl: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += -0.5 * (1.0 + logvar[i] - mu[i] * mu[i] - std::exp(logvar[i]));
  return s;
}

}  // namespace camarm
