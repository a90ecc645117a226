#include "camarm/plan/scripted_expert.hpp"

#include <array>
#include <cmath>
#include <random>

#include "camarm/plan/task_sampler.hpp"

namespace camarm {

std::string to_string(Style s) {
  switch (s) {
    case Style::Direct: return "direct";
    case Style::ArcLeft: return "arc_left";
    case Style::ArcRight: return "arc_right";
  }
  return "direct";
}

Style style_from_string(std::string_view s) {
  if (s == "direct") return Style::Direct;
  if (s == "arc_left") return Style::ArcLeft;
  if (s == "arc_right") return Style::ArcRight;
  throw ValidationError("unknown style '" + std::string(s) + "'");
}

void ExpertParams::validate() const {
  if (!(noise_sigma >= 0.0)) throw ValidationError("expert: noise_sigma must be >= 0");
  if (!(noise_low_hz > 0.0 && noise_low_hz <= noise_high_hz)) throw ValidationError("expert: bad noise band");
  if (noise_components < 1) throw ValidationError("expert: noise_components must be >= 1");
  if (!(rate > 0.0)) throw ValidationError("expert: rate must be > 0");
  if (!(max_joint_speed > 0.0)) throw ValidationError("expert: max_joint_speed must be > 0");
  ik.validate();
}

ExpertParams expert_params_from_json(const nlohmann::json& j) {
  ExpertParams p;
  p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
  p.noise_low_hz = j.value("noise_low_hz", p.noise_low_hz);
  p.noise_high_hz = j.value("noise_high_hz", p.noise_high_hz);
  p.noise_components = j.value("noise_components", p.noise_components);
  p.rate = j.value("rate", p.rate);
  p.max_joint_speed = j.value("max_joint_speed", p.max_joint_speed);
  p.seed = j.value("seed", p.seed);
  if (j.contains("ik")) p.ik = ik_params_from_json(j.at("ik"));
  p.validate();
  return p;
}

nlohmann::json to_json(const ExpertParams& p) {
  return {{"noise_sigma", p.noise_sigma},         {"noise_low_hz", p.noise_low_hz},
          {"noise_high_hz", p.noise_high_hz},     {"noise_components", p.noise_components},
          {"rate", p.rate},                       {"max_joint_speed", p.max_joint_speed},
          {"seed", p.seed},                       {"ik", to_json(p.ik)}};
}

namespace {

struct CameraPath {
  Vec3 p0, p1, lateral;
  double offset;
  Vec3 rot_offset;  // log(R0 * look_at(p0)^-1), blended out over the motion
  Vec3 target;

  Vec3 position(double m) const { return p0 + m * (p1 - p0) + offset * std::sin(M_PI * m) * lateral; }
  Pose pose(double m) const {
    const Vec3 p = position(m);
    return Pose{p, (rotation_exp((1.0 - m) * rot_offset) * look_at(p, target)).normalized()};
  }
  double length() const {
    double len = 0.0;
    Vec3 prev = position(0.0);
    for (int i = 1; i <= 200; ++i) {
      const Vec3 p = position(i / 200.0);
      len += (p - prev).norm();
      prev = p;
    }
    return len;
  }
};

// Band-limited jitter: a sum of sinusoids with random frequencies and phases,
// scaled to RMS sigma per joint.
struct Jitter {
  std::array<std::vector<std::array<double, 3>>, kNumJoints> terms;  // {freq, phase, amplitude}

  Jitter(const ExpertParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> freq(p.noise_low_hz, p.noise_high_hz);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    const double amp = p.noise_sigma * std::sqrt(2.0 / p.noise_components);
    for (auto& t : terms) {
      for (int k = 0; k < p.noise_components; ++k) t.push_back({freq(rng), phase(rng), amp});
    }
  }
  Vec6 at(double t) const {
    Vec6 v;
    for (int j = 0; j < kNumJoints; ++j) {
      double s = 0.0;
      for (const auto& [f, ph, a] : terms[j]) s += a * std::sin(2.0 * M_PI * f * t + ph);
      v[j] = s;
    }
    return v;
  }
};

}  // namespace

ExpertTrajectory scripted_push_in(const RobotModel& model, const Scene& scene, const JointConfig& q_start,
                                  const Vec3& goal_eye, Style style, const ExpertParams& params) {
  params.validate();
  if (!q_start.finite() || !goal_eye.allFinite()) throw ValidationError("scripted_push_in: non-finite input");
  ExpertTrajectory out;
  out.style = style;
  auto fail = [&](std::string why) {
    out.ok = false;
    out.failure = std::move(why);
    return out;
  };

  const Pose start = camera_pose(model, q_start);
  CameraPath path;
  path.p0 = start.position;
  path.p1 = goal_eye;
  path.target = scene.target.position;
  Vec3 chord = path.p1 - path.p0;
  chord.z() = 0.0;
  path.lateral = chord.norm() > 1e-9 ? Vec3(Vec3::UnitZ().cross(chord).normalized()) : Vec3::UnitY();
  path.offset = style == Style::Direct ? 0.0 : (style == Style::ArcLeft ? 1.0 : -1.0) * scene.task.arc_amplitude;
  path.rot_offset = rotation_log(start.orientation * look_at(path.p0, path.target).conjugate());
  out.lateral = path.lateral;
  out.mid_camera = path.position(0.5);
  out.goal_camera = path.pose(1.0);

  const double rate = params.rate;
  double duration = std::max(scene.task.min_duration, path.length() / scene.task.nominal_speed);
  std::vector<JointConfig> qs;
  for (int attempt = 0;; ++attempt) {
    const auto n = static_cast<std::size_t>(std::ceil(duration * rate - 1e-9)) + 1;
    qs.assign(1, q_start);
    double peak = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double tau = std::min(static_cast<double>(k) / rate / duration, 1.0);
      const IkResult r = solve_ik(model, qs.back(), path.pose(min_jerk(tau)), params.ik);
      if (!r.converged) return fail("ik failed at t=" + std::to_string(static_cast<double>(k) / rate));
      peak = std::max(peak, (r.q.q - qs.back().q).cwiseAbs().maxCoeff() * rate);
      qs.push_back(r.q);
    }
    if (peak <= params.max_joint_speed) break;
    if (attempt == 3) return fail("joint speed limit not met");
    duration *= 1.05 * peak / params.max_joint_speed;
  }

  // Polish the goal so the final framing is exact, then blend the residual
  // correction in over the last samples.
  IkParams tight = params.ik;
  tight.pos_tol = 1e-9;
  tight.rot_tol = 1e-9;
  tight.max_iters = 2000;
  const IkResult polish = solve_ik(model, qs.back(), out.goal_camera, tight);
  const Vec6 corr = polish.q.q - qs.back().q;
  const std::size_t nblend = std::min<std::size_t>(qs.size() - 1, static_cast<std::size_t>(rate * 0.25));
  for (std::size_t i = 0; i < nblend; ++i) {
    const double w = min_jerk(static_cast<double>(i + 1) / nblend);
    qs[qs.size() - nblend + i].q += w * corr;
  }
  out.q_goal = qs.back();
  out.motion_duration = static_cast<double>(qs.size() - 1) / rate;

  if (params.noise_sigma > 0.0) {
    std::mt19937_64 rng(params.seed);
    const Jitter jitter(params, rng);
    const double T = out.motion_duration;
    for (std::size_t k = 1; k + 1 < qs.size(); ++k) {
      const double t = static_cast<double>(k) / rate;
      qs[k].q += std::sin(M_PI * t / T) * jitter.at(t);
    }
  }

  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (!model.within_limits(qs[k])) return fail("joint limits exceeded");
    if (in_collision(model, qs[k], scene, 0.0)) return fail("contact at t=" + std::to_string(static_cast<double>(k) / rate));
  }

  out.reference.rate = rate;
  out.reference.q = std::move(qs);
  out.reference.hold(scene.task.dwell);
  out.ok = true;
  return out;
}

ExpertTrajectory scripted_push_in(const RobotModel& model, const Scene& scene, const JointConfig& q_start, Style style,
                                  double noise_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ViewPlacement g = sample_placement(scene.task.goal, rng);
  ExpertParams p;
  p.noise_sigma = noise_sigma;
  p.seed = seed;
  return scripted_push_in(model, scene, q_start, view_position(scene, g.distance, g.azimuth, g.elevation), style, p);
}

}  // namespace camarm
