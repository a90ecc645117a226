#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/learn/loss.hpp"
#include "camarm/learn/optimizer.hpp"

namespace camarm {

struct TrainConfig {
  int batch_size = 64;
  double lr = 1e-4;
  int epochs = 100;
  double beta = 0.01;
  double lambda_smooth = 0.01;
  double weight_decay = 1e-4;
  double grad_clip = 1.0;  // global-norm clip, 0 disables
  std::string lr_schedule = "cosine";  // constant | cosine (decays to 0 over all steps)
  int stride = 1;          // clip stride when slicing episodes
  std::uint64_t seed = 0;

  void validate() const;
  LossWeights weights() const { return {beta, lambda_smooth}; }
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

// Raised when a loss or gradient goes non-finite; names the first offending parameter.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochStats {
  int epoch = 0;
  LossParts train;
  LossParts val;
};

struct TrainResult {
  Policy policy;  // parameters with the lowest validation loss
  std::vector<EpochStats> history;
  int best_epoch = -1;
  bool diverged = false;
  std::string error;
};

// One optimizer update on `batch`, gradients averaged over the batch; eps is
// drawn from `rng` per clip. Throws TrainingError on non-finite loss/gradients.
LossParts train_step(Policy& policy, AdamW& opt, const std::vector<const Clip*>& batch, const TrainConfig& cfg,
                     std::mt19937_64& rng);

// Learning rate for update `step` of `total`.
double scheduled_lr(const TrainConfig& cfg, long step, long total);

// Mean validation components with z = mu.
LossParts validation_loss(const Policy& policy, const std::vector<Clip>& clips, const LossWeights& w);

// Init from cfg.seed, fit norm stats on train, shuffle per epoch, keep
// the best-validation parameters (train loss when val is empty). A divergence
// stops training and returns the last good parameters with diverged = true.
TrainResult train_policy(const std::vector<Clip>& train, const std::vector<Clip>& val, const PolicyConfig& pcfg,
                         const TrainConfig& cfg);

}  // namespace camarm
