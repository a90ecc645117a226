#include "camarm/plan/rrt_star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace camarm {

void PlannerParams::validate() const {
  if (!(step_size > 0.0)) throw ValidationError("planner: step_size must be > 0");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw ValidationError("planner: goal_bias must lie in [0, 1]");
  if (max_iterations < 1) throw ValidationError("planner: max_iterations must be >= 1");
  if (!(rewire_radius_scale > 0.0)) throw ValidationError("planner: rewire_radius_scale must be > 0");
  if (!(safety_margin >= 0.0)) throw ValidationError("planner: safety_margin must be >= 0");
  if (!(resolution > 0.0)) throw ValidationError("planner: resolution must be > 0");
  if (refine_iterations < 0 || shortcut_rounds < 0) throw ValidationError("planner: iteration counts must be >= 0");
  if (!(speed_scale > 0.0 && speed_scale <= 1.0)) throw ValidationError("planner: speed_scale must lie in (0, 1]");
}

PlannerParams planner_params_from_json(const nlohmann::json& j) {
  PlannerParams p;
  p.step_size = j.value("step_size", p.step_size);
  p.goal_bias = j.value("goal_bias", p.goal_bias);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.rewire_radius_scale = j.value("rewire_radius_scale", p.rewire_radius_scale);
  p.safety_margin = j.value("safety_margin", p.safety_margin);
  p.resolution = j.value("resolution", p.resolution);
  p.refine_iterations = j.value("refine_iterations", p.refine_iterations);
  p.shortcut_rounds = j.value("shortcut_rounds", p.shortcut_rounds);
  p.speed_scale = j.value("speed_scale", p.speed_scale);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

nlohmann::json to_json(const PlannerParams& p) {
  return {{"step_size", p.step_size},
          {"goal_bias", p.goal_bias},
          {"max_iterations", p.max_iterations},
          {"rewire_radius_scale", p.rewire_radius_scale},
          {"safety_margin", p.safety_margin},
          {"resolution", p.resolution},
          {"refine_iterations", p.refine_iterations},
          {"shortcut_rounds", p.shortcut_rounds},
          {"speed_scale", p.speed_scale},
          {"seed", p.seed}};
}

std::string to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Ok: return "ok";
    case PlanStatus::StartInCollision: return "start_in_collision";
    case PlanStatus::GoalInCollision: return "goal_in_collision";
    case PlanStatus::NoSolution: return "no_solution";
  }
  return "unknown";
}

bool segment_free(const RobotModel& model, const Scene& scene, const JointConfig& a, const JointConfig& b,
                  double margin, double resolution) {
  const Vec6 d = b.q - a.q;
  const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / resolution)));
  for (int i = 0; i <= n; ++i) {
    const JointConfig q(a.q + (static_cast<double>(i) / n) * d);
    if (in_collision(model, q, scene, margin)) return false;
  }
  return true;
}

namespace {

struct Tree {
  std::vector<Vec6> q;
  std::vector<int> parent;
  std::vector<double> cost;
  std::vector<std::vector<int>> children;

  int add(const Vec6& x, int par, double c) {
    q.push_back(x);
    parent.push_back(par);
    cost.push_back(c);
    children.emplace_back();
    if (par >= 0) children[par].push_back(static_cast<int>(q.size()) - 1);
    return static_cast<int>(q.size()) - 1;
  }

  void reparent(int node, int par, double c) {
    auto& sib = children[parent[node]];
    sib.erase(std::find(sib.begin(), sib.end(), node));
    parent[node] = par;
    children[par].push_back(node);
    const double delta = c - cost[node];
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      cost[n] += delta;
      for (int ch : children[n]) stack.push_back(ch);
    }
  }

  std::vector<Vec6> path_to(int node) const {
    std::vector<Vec6> out;
    for (int n = node; n >= 0; n = parent[n]) out.push_back(q[n]);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

}  // namespace

PlanResult plan_rrt_star(const RobotModel& model, const Scene& scene, const JointConfig& q_start,
                         const JointConfig& q_goal, const PlannerParams& params) {
  params.validate();
  if (!q_start.finite() || !q_goal.finite()) throw ValidationError("plan_rrt_star: non-finite endpoint");
  PlanResult res;
  const double margin = params.safety_margin;
  if (in_collision(model, q_start, scene, margin)) {
    res.status = PlanStatus::StartInCollision;
    return res;
  }
  if (in_collision(model, q_goal, scene, margin)) {
    res.status = PlanStatus::GoalInCollision;
    return res;
  }
  if (q_start == q_goal) {
    res.status = PlanStatus::Ok;
    res.path.waypoints = {q_start};
    res.path.cost = 0.0;
    res.nodes = 1;
    return res;
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tree tree;
  tree.add(q_start.q, -1, 0.0);
  int goal_node = -1;
  int first_solution_iter = -1;
  const double max_edge = 4.0 * params.step_size;
  const double kconst = params.rewire_radius_scale * std::exp(1.0) * (1.0 + 1.0 / kNumJoints);

  auto edge_free = [&](const Vec6& a, const Vec6& b) {
    return segment_free(model, scene, JointConfig(a), JointConfig(b), margin, params.resolution);
  };

  std::vector<std::pair<double, int>> by_dist;
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    if (first_solution_iter >= 0 && params.refine_iterations > 0 && it - first_solution_iter >= params.refine_iterations) {
      break;
    }
    Vec6 sample;
    if (unit(rng) < params.goal_bias) {
      sample = q_goal.q;
    } else {
      for (int j = 0; j < kNumJoints; ++j) sample[j] = model.lower[j] + unit(rng) * (model.upper[j] - model.lower[j]);
    }

    // Nearest neighbour and the distance-sorted candidate list (goal node excluded).
    by_dist.clear();
    for (int n = 0; n < static_cast<int>(tree.q.size()); ++n) {
      if (n == goal_node) continue;
      by_dist.emplace_back((tree.q[n] - sample).squaredNorm(), n);
    }
    const int nearest = std::min_element(by_dist.begin(), by_dist.end())->second;
    Vec6 dir = sample - tree.q[nearest];
    const double dn = dir.norm();
    if (dn < 1e-12) continue;
    const Vec6 x_new = dn > params.step_size ? Vec6(tree.q[nearest] + dir * (params.step_size / dn)) : sample;
    if (in_collision(model, JointConfig(x_new), scene, margin)) continue;

    const auto n_nodes = static_cast<double>(by_dist.size());
    const auto k = static_cast<std::size_t>(std::ceil(kconst * std::log(n_nodes + 1.0)));
    for (auto& e : by_dist) e.first = (tree.q[e.second] - x_new).norm();
    const std::size_t kk = std::min(k, by_dist.size());
    std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(kk), by_dist.end());
    std::vector<std::pair<double, int>> near(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(kk));
    near.erase(std::remove_if(near.begin(), near.end(), [&](const auto& e) { return e.first > max_edge && e.second != nearest; }),
               near.end());

    // Choose parent: cheapest cost-to-come whose edge is free, checked lazily in cost order.
    std::vector<std::pair<double, int>> order;
    for (const auto& [d, n] : near) order.emplace_back(tree.cost[n] + d, n);
    std::sort(order.begin(), order.end());
    int parent = -1;
    double new_cost = 0.0;
    for (const auto& [c, n] : order) {
      if (edge_free(tree.q[n], x_new)) {
        parent = n;
        new_cost = c;
        break;
      }
    }
    if (parent < 0) continue;
    const int id = tree.add(x_new, parent, new_cost);

    // Rewire neighbours through the new node.
    for (const auto& [d, n] : near) {
      if (n == parent || n == 0) continue;
      const double c = new_cost + d;
      if (c + 1e-12 < tree.cost[n] && edge_free(x_new, tree.q[n])) tree.reparent(n, id, c);
    }

    // Goal connection.
    const double dg = (q_goal.q - x_new).norm();
    if (dg <= params.step_size) {
      const double c = new_cost + dg;
      if (goal_node < 0) {
        if (edge_free(x_new, q_goal.q)) {
          goal_node = tree.add(q_goal.q, id, c);
          first_solution_iter = it;
        }
      } else if (c + 1e-12 < tree.cost[goal_node] && edge_free(x_new, q_goal.q)) {
        tree.reparent(goal_node, id, c);
      }
    }
    if (goal_node >= 0) {
      const double c = tree.cost[goal_node];
      if (res.improvements.empty() || c < res.improvements.back().second - 1e-12) res.improvements.emplace_back(it, c);
    }
  }

  res.iterations = it;
  res.nodes = static_cast<int>(tree.q.size());
  if (goal_node < 0) {
    res.status = PlanStatus::NoSolution;
    return res;
  }
  res.status = PlanStatus::Ok;
  for (const Vec6& x : tree.path_to(goal_node)) res.path.waypoints.emplace_back(x);
  res.path.recompute_cost();
  return res;
}

namespace {

// Configuration at arclength s along the path, and the index of the segment containing it.
std::pair<JointConfig, std::size_t> point_at(const std::vector<JointConfig>& w, const std::vector<double>& cum, double s) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t seg = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cum.begin(), 1) - 1, w.size() - 2);
  const double len = cum[seg + 1] - cum[seg];
  const double f = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
  return {JointConfig((1.0 - f) * w[seg].q + f * w[seg + 1].q), seg};
}

}  // namespace

Path shortcut_path(const Path& path, const RobotModel& model, const Scene& scene, const PlannerParams& params,
                   int rounds) {
  if (path.waypoints.size() < 3) {
    Path out = path;
    out.recompute_cost();
    return out;
  }
  const double margin = params.safety_margin;
  const auto& w = path.waypoints;

  // Greedy: from each kept waypoint jump to the farthest directly reachable one.
  std::vector<JointConfig> pts{w.front()};
  std::size_t i = 0;
  while (i + 1 < w.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = w.size() - 1; j > i + 1; --j) {
      if (segment_free(model, scene, w[i], w[j], margin, params.resolution)) {
        next = j;
        break;
      }
    }
    pts.push_back(w[next]);
    i = next;
  }

  std::mt19937_64 rng(params.seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < rounds && pts.size() >= 3; ++r) {
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t k = 1; k < pts.size(); ++k) cum[k] = cum[k - 1] + (pts[k].q - pts[k - 1].q).norm();
    const double total = cum.back();
    if (total <= 0.0) break;
    double s0 = unit(rng) * total, s1 = unit(rng) * total;
    if (s0 > s1) std::swap(s0, s1);
    const auto [a, sa] = point_at(pts, cum, s0);
    const auto [b, sb] = point_at(pts, cum, s1);
    if (sa == sb) continue;
    const double old_len = s1 - s0;
    const double new_len = (b.q - a.q).norm();
    if (new_len >= old_len - 1e-9) continue;
    if (!segment_free(model, scene, a, b, margin, params.resolution)) continue;
    std::vector<JointConfig> next(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(sa) + 1);
    next.push_back(a);
    next.push_back(b);
    next.insert(next.end(), pts.begin() + static_cast<std::ptrdiff_t>(sb) + 1, pts.end());
    pts = std::move(next);
  }

  // Drop coincident consecutive points left by splicing at segment ends.
  std::vector<JointConfig> clean{pts.front()};
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if ((pts[k].q - clean.back().q).norm() > 1e-12) clean.push_back(pts[k]);
  }
  if (clean.size() == 1 && pts.size() > 1) clean.push_back(pts.back());
  Path out;
  out.waypoints = std::move(clean);
  out.recompute_cost();
  if (out.cost > path.cost) return path;
  return out;
}

}  // namespace camarm
