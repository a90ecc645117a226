#include "camarm/learn/train.hpp"

#include <cmath>
#include <limits>

namespace camarm {

void TrainConfig::validate() const {
  if (batch_size < 1 || epochs < 0 || stride < 1) throw ValidationError("train: batch_size, stride >= 1 and epochs >= 0");
  if (!(lr >= 0.0) || !(beta >= 0.0) || !(lambda_smooth >= 0.0) || !(weight_decay >= 0.0) || !(grad_clip >= 0.0))
    throw ValidationError("train: rates and weights must be non-negative");
  if (lr_schedule != "constant" && lr_schedule != "cosine") throw ValidationError("train: unknown lr_schedule '" + lr_schedule + "'");
}

double scheduled_lr(const TrainConfig& cfg, long step, long total) {
  if (cfg.lr_schedule == "constant" || total <= 0) return cfg.lr;
  return cfg.lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total)));
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.beta = j.value("beta", c.beta);
  c.lambda_smooth = j.value("lambda_smooth", c.lambda_smooth);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.lr_schedule = j.value("lr_schedule", c.lr_schedule);
  c.stride = j.value("stride", c.stride);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size}, {"lr", c.lr},
          {"epochs", c.epochs},         {"beta", c.beta},
          {"lambda_smooth", c.lambda_smooth}, {"weight_decay", c.weight_decay},
          {"grad_clip", c.grad_clip},   {"lr_schedule", c.lr_schedule},
          {"stride", c.stride},
          {"seed", c.seed}};
}

namespace {

void check_finite(const Policy& policy, const LossParts& loss) {
  if (!std::isfinite(loss.total)) throw TrainingError("non-finite loss");
  for (const Parameter& p : policy.params)
    for (double g : p.grad.data)
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in '" + p.name + "'");
}

}  // namespace

LossParts train_step(Policy& policy, AdamW& opt, const std::vector<const Clip*>& batch, const TrainConfig& cfg,
                     std::mt19937_64& rng) {
  if (batch.empty()) throw ValidationError("train_step: empty batch");
  policy.params.zero_grad();
  std::normal_distribution<double> normal(0.0, 1.0);
  const double wgt = 1.0 / static_cast<double>(batch.size());
  LossParts sum;
  std::vector<double> eps(static_cast<std::size_t>(policy.config.d_z));
  for (const Clip* c : batch) {
    for (double& e : eps) e = normal(rng);
    sum += accumulate_gradients(policy, *c, eps, cfg.weights(), wgt);
  }
  const LossParts mean = sum.scaled(wgt);
  check_finite(policy, mean);
  clip_grad_norm(policy.params, cfg.grad_clip);
  opt.step(policy.params);
  return mean;
}

LossParts validation_loss(const Policy& policy, const std::vector<Clip>& clips, const LossWeights& w) {
  LossParts sum;
  for (const Clip& c : clips) sum += evaluate_loss(policy, c, {}, w);
  return clips.empty() ? sum : sum.scaled(1.0 / static_cast<double>(clips.size()));
}

TrainResult train_policy(const std::vector<Clip>& train, const std::vector<Clip>& val, const PolicyConfig& pcfg,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw ValidationError("train_policy: empty train split");
  std::mt19937_64 rng(cfg.seed);
  Policy policy(pcfg, rng());
  policy.norm = compute_norm_stats(train, pcfg.ablation);
  AdamW opt(policy.params, AdamWConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

  TrainResult result;
  result.policy = policy;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const long per_epoch = static_cast<long>((train.size() + cfg.batch_size - 1) / cfg.batch_size);
  const long total_steps = per_epoch * cfg.epochs;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    EpochStats st;
    st.epoch = epoch;
    int batches = 0;
    try {
      for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
        std::vector<const Clip*> batch;
        for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i)
          batch.push_back(&train[static_cast<std::size_t>(order[i])]);
        opt.config().lr = scheduled_lr(cfg, opt.steps(), total_steps);
        st.train += train_step(policy, opt, batch, cfg, rng);
        ++batches;
      }
    } catch (const TrainingError& e) {
      result.diverged = true;
      result.error = "epoch " + std::to_string(epoch) + ": " + e.what();
      return result;
    }
    st.train = st.train.scaled(1.0 / batches);
    st.val = val.empty() ? st.train : validation_loss(policy, val, cfg.weights());
    result.history.push_back(st);
    if (std::isfinite(st.val.total) && st.val.total < best) {
      best = st.val.total;
      result.best_epoch = epoch;
      result.policy = policy;
    }
  }
  if (cfg.epochs == 0) result.policy = policy;
  return result;
}

}  // namespace camarm
