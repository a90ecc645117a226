#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/learn/autograd.hpp"
#include "camarm/learn/dataset.hpp"

namespace camarm {

enum class Ablation { None, IncrementalAction, RgbOnly, NoProprio };
std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);

struct PolicyConfig {
  int d_model = 64;
  int heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int d_z = 8;
  int ffn_mult = 4;
  int history = 8;   // S
  int horizon = 15;  // H
  Ablation ablation = Ablation::None;

  void validate() const;
};

PolicyConfig policy_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolicyConfig& c);

// Per-channel standardization, fit on the train split.
struct NormStats {
  std::array<double, kFeatureDim> feat_mean{}, feat_std{};
  std::array<double, kNumJoints> joint_mean{}, joint_std{};
  std::array<double, kNumJoints> action_mean{}, action_std{};

  static NormStats identity();
};

nlohmann::json to_json(const NormStats& n);
NormStats norm_stats_from_json(const nlohmann::json& j);

// Training labels in the policy's action space: H absolute joint targets, or
// for INCREMENTAL_ACTION the per-step increments q*_{t+i} - q*_{t+i-1} with
// q*_t the last observed joint vector.
Mat action_labels(const Clip& c, Ablation a);

// Standard deviations below `floor` are replaced by `floor`.
NormStats compute_norm_stats(const std::vector<Clip>& clips, Ablation a, double floor = 1e-3);

// Goal-conditioned chunked-action policy with a CVAE style encoder.
//   tokens = [style(z); state_1..S; goal] + sinusoidal positions
//   state_i = mlp_f(feature_i) + mlp_q(q_i)      (mlp_q dropped without proprioception)
//   goal    = mlp_g(goal feature)                 (dropped for RGB_ONLY)
// A pre-norm transformer encoder reads the tokens; H learned query slots
// decode through self- and cross-attention to H x 6 outputs, de-standardized
// with the action stats. The per-modality two-layer perceptrons stand in for
// image backbones, since inputs here are 16-dim synthetic features.
class Policy {
 public:
  Policy() = default;
  Policy(const PolicyConfig& config, std::uint64_t seed);

  PolicyConfig config;
  NormStats norm = NormStats::identity();
  ParameterSet params;

  // Encoder q_phi over action-space labels (H x 6): mu and clamped logvar (1 x d_z).
  std::pair<Var, Var> encode(Tape& t, const Mat& labels, bool track);

  // Action-space prediction (H x 6, radians).
  Var decode(Tape& t, const std::vector<VisualFeature>& features, const std::vector<JointConfig>& joints,
             const VisualFeature& goal, Var z, bool track);

  // Absolute joint targets q_{t+1..t+H} (H x 6). Throws ValidationError on
  // history/z size mismatch.
  Mat forward(const std::vector<VisualFeature>& features, const std::vector<JointConfig>& joints,
              const VisualFeature& goal, const std::vector<double>& z) const;

  // Converts an action-space prediction to absolute joint targets.
  Mat to_absolute(const Mat& actions, const JointConfig& q_now) const;

 private:
  struct Dense {
    int w = -1, b = -1;
  };
  struct Norm {
    int g = -1, b = -1;
  };
  struct Mlp {
    Dense l1, l2;
  };
  struct AttnBlock {
    Dense q, k, v, o;
  };
  struct EncLayer {
    Norm n1, n2;
    AttnBlock attn;
    Mlp ffn;
  };
  struct DecLayer {
    Norm n1, n2, n3;
    AttnBlock self_attn, cross_attn;
    Mlp ffn;
  };

  Dense dense(const std::string& name, int in, int out);
  Norm norm_layer(const std::string& name, int width);
  Mlp mlp(const std::string& name, int in, int hidden, int out);

  Var p(Tape& t, int idx, bool track);
  Var apply(Tape& t, const Dense& d, Var x, bool track);
  Var apply(Tape& t, const Mlp& m, Var x, bool track);
  Var apply(Tape& t, const Norm& n, Var x, bool track);
  Var apply(Tape& t, const AttnBlock& a, Var x, Var mem, bool track);

  Mlp feat_embed_, joint_embed_, goal_embed_, style_encoder_;
  Dense style_proj_, head_;
  int queries_ = -1;
  std::vector<EncLayer> enc_;
  std::vector<DecLayer> dec_;
  Norm enc_norm_, dec_norm_;
};

// Sinusoidal position table [rows x width].
Mat positional_encoding(int rows, int width);

}  // namespace camarm
