#include "camarm/sim/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace camarm {

using nlohmann::json;

void CameraIntrinsics::validate() const {
  if (!(hfov > 0.0 && hfov < M_PI) || !(vfov > 0.0 && vfov < M_PI)) {
    throw ValidationError("camera: field of view must lie in (0, pi)");
  }
  if (width <= 0 || height <= 0) throw ValidationError("camera: resolution must be positive");
}

void Scene::validate() const {
  camera.validate();
  if (!(obstacle.extents.array() > 0.0).all()) throw ValidationError("scene: obstacle extents must be > 0");
  if (!(workspace.extents.array() > 0.0).all()) throw ValidationError("scene: workspace extents must be > 0");
  if (point_box_signed_distance(target.position, workspace) > 0.0) {
    throw ValidationError("scene: target must lie inside the workspace");
  }
  if (!(target.radius > 0.0)) throw ValidationError("scene: target radius must be > 0");
  if (fiducials.size() != 3) throw ValidationError("scene: exactly 3 fiducials are required");
  for (const ViewRegion* r : {&task.start, &task.goal}) {
    if (!(r->min_distance > 0.0 && r->min_distance <= r->max_distance) || r->min_azimuth > r->max_azimuth ||
        r->min_elevation > r->max_elevation) {
      throw ValidationError("scene: malformed view region");
    }
  }
}

namespace {

Vec3 vec3(const json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }
json arr(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

ViewRegion region_from(const json& j) {
  ViewRegion r;
  r.min_distance = j.at("distance").at(0).get<double>();
  r.max_distance = j.at("distance").at(1).get<double>();
  r.min_azimuth = j.at("azimuth").at(0).get<double>();
  r.max_azimuth = j.at("azimuth").at(1).get<double>();
  r.min_elevation = j.at("elevation").at(0).get<double>();
  r.max_elevation = j.at("elevation").at(1).get<double>();
  return r;
}

json region_to(const ViewRegion& r) {
  return {{"distance", {r.min_distance, r.max_distance}},
          {"azimuth", {r.min_azimuth, r.max_azimuth}},
          {"elevation", {r.min_elevation, r.max_elevation}}};
}

}  // namespace

Scene scene_from_json(const json& j) {
  Scene s;
  try {
    s.name = j.value("name", s.name);
    s.target.position = vec3(j.at("target").at("position"));
    s.target.radius = j.at("target").at("radius").get<double>();
    const json& ob = j.at("obstacle");
    s.obstacle.center = vec3(ob.at("center"));
    s.obstacle.extents = vec3(ob.at("extents"));
    s.obstacle_present = ob.at("present").get<bool>();
    s.workspace.center = vec3(j.at("workspace").at("center"));
    s.workspace.extents = vec3(j.at("workspace").at("extents"));
    for (const json& f : j.at("fiducials")) s.fiducials.push_back(vec3(f));
    const json& cam = j.at("camera");
    s.camera.hfov = cam.at("hfov").get<double>();
    s.camera.vfov = cam.at("vfov").get<double>();
    s.camera.cx = cam.value("cx", 0.0);
    s.camera.cy = cam.value("cy", 0.0);
    s.camera.width = cam.at("width").get<int>();
    s.camera.height = cam.at("height").get<int>();
    const json& task = j.at("task");
    s.task.heading = task.value("heading", s.task.heading);
    s.task.start = region_from(task.at("start"));
    s.task.goal = region_from(task.at("goal"));
    s.task.arc_amplitude = task.value("arc_amplitude", s.task.arc_amplitude);
    s.task.nominal_speed = task.value("nominal_speed", s.task.nominal_speed);
    s.task.dwell = task.value("dwell", s.task.dwell);
    s.task.min_duration = task.value("min_duration", s.task.min_duration);
    if (task.contains("rest")) {
      const json& r = task.at("rest");
      if (r.size() != kNumJoints) throw ValidationError("scene config: task.rest needs 6 entries");
      for (int i = 0; i < kNumJoints; ++i) s.task.rest[i] = r.at(i).get<double>();
    }
    s.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scene config: ") + e.what());
  }
  s.validate();
  return s;
}

json scene_to_json(const Scene& s) {
  json fid = json::array();
  for (const auto& f : s.fiducials) fid.push_back(arr(f));
  return {{"schema", "camarm.scene/1"},
          {"name", s.name},
          {"target", {{"position", arr(s.target.position)}, {"radius", s.target.radius}}},
          {"obstacle", {{"center", arr(s.obstacle.center)}, {"extents", arr(s.obstacle.extents)}, {"present", s.obstacle_present}}},
          {"workspace", {{"center", arr(s.workspace.center)}, {"extents", arr(s.workspace.extents)}}},
          {"fiducials", fid},
          {"camera",
           {{"hfov", s.camera.hfov},
            {"vfov", s.camera.vfov},
            {"cx", s.camera.cx},
            {"cy", s.camera.cy},
            {"width", s.camera.width},
            {"height", s.camera.height}}},
          {"task",
           {{"heading", s.task.heading},
            {"start", region_to(s.task.start)},
            {"goal", region_to(s.task.goal)},
            {"arc_amplitude", s.task.arc_amplitude},
            {"nominal_speed", s.task.nominal_speed},
            {"dwell", s.task.dwell},
            {"min_duration", s.task.min_duration},
            {"rest", std::vector<double>(s.task.rest.q.data(), s.task.rest.q.data() + kNumJoints)}}},
          {"seed", s.seed}};
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scene config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("scene config " + path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

Vec3 view_position(const Scene& scene, double distance, double azimuth, double elevation) {
  const Vec3& t = scene.target.position;
  const double h = scene.task.heading + azimuth;
  const Vec3 dir_h(std::cos(h), std::sin(h), 0.0);
  return t + distance * (std::cos(elevation) * dir_h + std::sin(elevation) * Vec3::UnitZ());
}

double clearance(const RobotModel& model, const JointConfig& q, const Scene& scene) {
  double best = std::numeric_limits<double>::infinity();
  for (const WorldCapsule& c : link_capsules(model, q)) {
    if (!c.floor_exempt) best = std::min(best, capsule_floor_distance(c));
    if (scene.obstacle_present) best = std::min(best, capsule_box_distance(c, scene.obstacle));
  }
  return best;
}

bool in_collision(const RobotModel& model, const JointConfig& q, const Scene& scene, double margin) {
  if (margin < 0.0) throw ValidationError("in_collision: margin must be >= 0");
  return clearance(model, q, scene) < margin;
}

}  // namespace camarm
