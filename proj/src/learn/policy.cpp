#include "camarm/learn/policy.hpp"

#include <cmath>
#include <random>

namespace camarm {

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::IncrementalAction: return "incremental_action";
    case Ablation::RgbOnly: return "rgb_only";
    case Ablation::NoProprio: return "no_proprio";
  }
  return "none";
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "none") return Ablation::None;
  if (s == "incremental_action") return Ablation::IncrementalAction;
  if (s == "rgb_only") return Ablation::RgbOnly;
  if (s == "no_proprio") return Ablation::NoProprio;
  throw ValidationError("unknown ablation '" + s + "'");
}

void PolicyConfig::validate() const {
  if (d_model < 1 || heads < 1 || d_model % heads != 0) throw ValidationError("policy: d_model must be a positive multiple of heads");
  if (enc_layers < 0 || dec_layers < 1) throw ValidationError("policy: need enc_layers >= 0 and dec_layers >= 1");
  if (d_z < 1 || ffn_mult < 1) throw ValidationError("policy: d_z and ffn_mult must be >= 1");
  if (history < 1 || horizon < 1) throw ValidationError("policy: history and horizon must be >= 1");
}

PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.heads = j.value("heads", c.heads);
  c.enc_layers = j.value("enc_layers", c.enc_layers);
  c.dec_layers = j.value("dec_layers", c.dec_layers);
  c.d_z = j.value("d_z", c.d_z);
  c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
  c.history = j.value("history", c.history);
  c.horizon = j.value("horizon", c.horizon);
  c.ablation = ablation_from_string(j.value("ablation", std::string("none")));
  c.validate();
  return c;
}

nlohmann::json to_json(const PolicyConfig& c) {
  return {{"d_model", c.d_model}, {"heads", c.heads},       {"enc_layers", c.enc_layers}, {"dec_layers", c.dec_layers},
          {"d_z", c.d_z},         {"ffn_mult", c.ffn_mult}, {"history", c.history},       {"horizon", c.horizon},
          {"ablation", to_string(c.ablation)}};
}

NormStats NormStats::identity() {
  NormStats n;
  n.feat_std.fill(1.0);
  n.joint_std.fill(1.0);
  n.action_std.fill(1.0);
  return n;
}

nlohmann::json to_json(const NormStats& n) {
  return {{"feat_mean", n.feat_mean},     {"feat_std", n.feat_std},     {"joint_mean", n.joint_mean},
          {"joint_std", n.joint_std},     {"action_mean", n.action_mean}, {"action_std", n.action_std}};
}

NormStats norm_stats_from_json(const nlohmann::json& j) {
  NormStats n;
  j.at("feat_mean").get_to(n.feat_mean);
  j.at("feat_std").get_to(n.feat_std);
  j.at("joint_mean").get_to(n.joint_mean);
  j.at("joint_std").get_to(n.joint_std);
  j.at("action_mean").get_to(n.action_mean);
  j.at("action_std").get_to(n.action_std);
  return n;
}

Mat action_labels(const Clip& c, Ablation a) {
  const int H = static_cast<int>(c.future.size());
  Mat m(H, kNumJoints);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      const double qi = c.future[static_cast<std::size_t>(i)][j];
      if (a == Ablation::IncrementalAction) {
        const double prev = i == 0 ? c.obs_joints.back()[j] : c.future[static_cast<std::size_t>(i - 1)][j];
        m(i, j) = qi - prev;
      } else {
        m(i, j) = qi;
      }
    }
  }
  return m;
}

namespace {

template <std::size_t N>
struct Moments {
  std::array<double, N> sum{}, sq{};
  double n = 0.0;
  void add(const double* x) {
    for (std::size_t i = 0; i < N; ++i) {
      sum[i] += x[i];
      sq[i] += x[i] * x[i];
    }
    n += 1.0;
  }
  void finish(std::array<double, N>& mean, std::array<double, N>& sd, double floor) const {
    for (std::size_t i = 0; i < N; ++i) {
      mean[i] = n > 0.0 ? sum[i] / n : 0.0;
      const double var = n > 0.0 ? std::max(0.0, sq[i] / n - mean[i] * mean[i]) : 1.0;
      sd[i] = std::max(std::sqrt(var), floor);
    }
  }
};

}  // namespace

NormStats compute_norm_stats(const std::vector<Clip>& clips, Ablation a, double floor) {
  if (clips.empty()) throw ValidationError("compute_norm_stats: no clips");
  Moments<kFeatureDim> f;
  Moments<kNumJoints> q, act;
  for (const Clip& c : clips) {
    for (const auto& v : c.obs_features) f.add(v.v.data());
    for (const auto& j : c.obs_joints) q.add(j.q.data());
    const Mat l = action_labels(c, a);
    for (int i = 0; i < l.rows; ++i) act.add(l.row(i));
  }
  NormStats n;
  f.finish(n.feat_mean, n.feat_std, floor);
  q.finish(n.joint_mean, n.joint_std, floor);
  act.finish(n.action_mean, n.action_std, floor);
  return n;
}

Mat positional_encoding(int rows, int width) {
  Mat pe(rows, width);
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < width; i += 2) {
      const double f = std::pow(10000.0, -static_cast<double>(i) / width);
      pe(r, i) = std::sin(r * f);
      if (i + 1 < width) pe(r, i + 1) = std::cos(r * f);
    }
  return pe;
}

Policy::Policy(const PolicyConfig& cfg, std::uint64_t seed) : config(cfg) {
  config.validate();
  const int d = config.d_model;
  const int ff = d * config.ffn_mult;
  feat_embed_ = mlp("embed.feature", kFeatureDim, d, d);
  joint_embed_ = mlp("embed.joint", kNumJoints, d, d);
  goal_embed_ = mlp("embed.goal", kFeatureDim, d, d);
  style_proj_ = dense("embed.style", config.d_z, d);
  style_encoder_ = mlp("cvae.encoder", config.horizon * kNumJoints, d, 2 * config.d_z);
  auto attn = [&](const std::string& n) {
    return AttnBlock{dense(n + ".q", d, d), dense(n + ".k", d, d), dense(n + ".v", d, d), dense(n + ".o", d, d)};
  };
  for (int l = 0; l < config.enc_layers; ++l) {
    const std::string n = "enc" + std::to_string(l);
    enc_.push_back(EncLayer{norm_layer(n + ".ln1", d), norm_layer(n + ".ln2", d), attn(n + ".attn"), mlp(n + ".ffn", d, ff, d)});
  }
  enc_norm_ = norm_layer("enc.ln", d);
  queries_ = params.add("dec.queries", config.horizon, d);
  for (int l = 0; l < config.dec_layers; ++l) {
    const std::string n = "dec" + std::to_string(l);
    dec_.push_back(DecLayer{norm_layer(n + ".ln1", d), norm_layer(n + ".ln2", d), norm_layer(n + ".ln3", d),
                            attn(n + ".self"), attn(n + ".cross"), mlp(n + ".ffn", d, ff, d)});
  }
  dec_norm_ = norm_layer("dec.ln", d);
  head_ = dense("head", d, kNumJoints);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Parameter& prm : params) {
    const std::string& n = prm.name;
    const bool is_bias = n.size() >= 2 && n.compare(n.size() - 2, 2, ".b") == 0;
    const bool is_gain = n.size() >= 2 && n.compare(n.size() - 2, 2, ".g") == 0;
    if (is_bias) continue;
    if (is_gain) {
      std::fill(prm.value.data.begin(), prm.value.data.end(), 1.0);
      continue;
    }
    const double a = n == "dec.queries" ? 0.5 : std::sqrt(6.0 / (prm.value.rows + prm.value.cols));
    for (double& v : prm.value.data) v = a * unit(rng);
  }
}

Policy::Dense Policy::dense(const std::string& name, int in, int out) {
  Dense d;
  d.w = params.add(name + ".w", in, out);
  d.b = params.add(name + ".b", 1, out);
  return d;
}

Policy::Norm Policy::norm_layer(const std::string& name, int width) {
  Norm n;
  n.g = params.add(name + ".g", 1, width);
  n.b = params.add(name + ".b", 1, width);
  return n;
}

Policy::Mlp Policy::mlp(const std::string& name, int in, int hidden, int out) {
  return Mlp{dense(name + ".l1", in, hidden), dense(name + ".l2", hidden, out)};
}

Var Policy::p(Tape& t, int idx, bool track) {
  return track ? t.param(params, idx) : t.constant(params[idx].value);
}

Var Policy::apply(Tape& t, const Dense& d, Var x, bool track) { return linear(t, x, p(t, d.w, track), p(t, d.b, track)); }

Var Policy::apply(Tape& t, const Mlp& m, Var x, bool track) {
  return apply(t, m.l2, gelu(t, apply(t, m.l1, x, track)), track);
}

Var Policy::apply(Tape& t, const Norm& n, Var x, bool track) {
  return layer_norm(t, x, p(t, n.g, track), p(t, n.b, track));
}

Var Policy::apply(Tape& t, const AttnBlock& a, Var x, Var mem, bool track) {
  const Var q = apply(t, a.q, x, track);
  const Var k = apply(t, a.k, mem, track);
  const Var v = apply(t, a.v, mem, track);
  return apply(t, a.o, attention(t, q, k, v, config.heads), track);
}

std::pair<Var, Var> Policy::encode(Tape& t, const Mat& labels, bool track) {
  if (labels.rows != config.horizon || labels.cols != kNumJoints) throw ValidationError("encode: labels must be H x 6");
  Mat x(1, config.horizon * kNumJoints);
  for (int i = 0; i < labels.rows; ++i)
    for (int j = 0; j < kNumJoints; ++j) x(0, i * kNumJoints + j) = (labels(i, j) - norm.action_mean[j]) / norm.action_std[j];
  const Var out = reshape(t, apply(t, style_encoder_, t.constant(std::move(x)), track), 2, config.d_z);
  return {slice_rows(t, out, 0, 1), clamp(t, slice_rows(t, out, 1, 1), -10.0, 10.0)};
}

Var Policy::decode(Tape& t, const std::vector<VisualFeature>& features, const std::vector<JointConfig>& joints,
                   const VisualFeature& goal, Var z, bool track) {
  const int S = config.history;
  if (static_cast<int>(features.size()) != S || static_cast<int>(joints.size()) != S)
    throw ValidationError("policy: observation history must hold exactly S entries");
  if (t.value(z).rows != 1 || t.value(z).cols != config.d_z) throw ValidationError("policy: z must be 1 x d_z");

  Mat fm(S, kFeatureDim), qm(S, kNumJoints), gm(1, kFeatureDim);
  for (int i = 0; i < S; ++i) {
    for (int c = 0; c < kFeatureDim; ++c) fm(i, c) = (features[static_cast<std::size_t>(i)][c] - norm.feat_mean[c]) / norm.feat_std[c];
    for (int c = 0; c < kNumJoints; ++c) qm(i, c) = (joints[static_cast<std::size_t>(i)][c] - norm.joint_mean[c]) / norm.joint_std[c];
  }
  for (int c = 0; c < kFeatureDim; ++c) gm(0, c) = (goal[c] - norm.feat_mean[c]) / norm.feat_std[c];

  const bool use_joints = config.ablation != Ablation::NoProprio && config.ablation != Ablation::RgbOnly;
  const bool use_goal = config.ablation != Ablation::RgbOnly;

  Var state = apply(t, feat_embed_, t.constant(std::move(fm)), track);
  if (use_joints) state = add(t, state, apply(t, joint_embed_, t.constant(std::move(qm)), track));
  std::vector<Var> tokens{apply(t, style_proj_, z, track), state};
  if (use_goal) tokens.push_back(apply(t, goal_embed_, t.constant(std::move(gm)), track));
  Var x = concat_rows(t, tokens);
  const int n = t.value(x).rows;
  const int d = config.d_model;
  x = add(t, x, t.constant(positional_encoding(n, d)));
  for (const EncLayer& l : enc_) {
    const Var h = apply(t, l.n1, x, track);
    x = add(t, x, apply(t, l.attn, h, h, track));
    x = add(t, x, apply(t, l.ffn, apply(t, l.n2, x, track), track));
  }
  const Var mem = apply(t, enc_norm_, x, track);

  Var y = add(t, p(t, queries_, track), t.constant(positional_encoding(config.horizon, d)));
  for (const DecLayer& l : dec_) {
    const Var h = apply(t, l.n1, y, track);
    y = add(t, y, apply(t, l.self_attn, h, h, track));
    y = add(t, y, apply(t, l.cross_attn, apply(t, l.n2, y, track), mem, track));
    y = add(t, y, apply(t, l.ffn, apply(t, l.n3, y, track), track));
  }
  const Var out = apply(t, head_, apply(t, dec_norm_, y, track), track);
  const std::vector<double> sd(norm.action_std.begin(), norm.action_std.end());
  const std::vector<double> mu(norm.action_mean.begin(), norm.action_mean.end());
  return add_row_const(t, scale_cols_const(t, out, sd), mu);
}

Mat Policy::forward(const std::vector<VisualFeature>& features, const std::vector<JointConfig>& joints,
                    const VisualFeature& goal, const std::vector<double>& z) const {
  if (static_cast<int>(z.size()) != config.d_z) throw ValidationError("policy: z must have d_z entries");
  if (joints.empty()) throw ValidationError("policy: empty joint history");
  Tape t;
  Mat zm(1, config.d_z);
  std::copy(z.begin(), z.end(), zm.data.begin());
  auto* self = const_cast<Policy*>(this);  // track=false never touches parameters
  const Var a = self->decode(t, features, joints, goal, t.constant(std::move(zm)), false);
  return to_absolute(t.value(a), joints.back());
}

Mat Policy::to_absolute(const Mat& actions, const JointConfig& q_now) const {
  if (config.ablation != Ablation::IncrementalAction) return actions;
  Mat q = actions;
  for (int i = 0; i < q.rows; ++i)
    for (int j = 0; j < q.cols; ++j) q(i, j) += i == 0 ? q_now[j] : q(i - 1, j);
  return q;
}

}  // namespace camarm
