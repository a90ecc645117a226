#include <fstream>

#include "camarm/arm/model.hpp"

namespace camarm {

namespace {

using nlohmann::json;

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Pose pose_from(const json& j) { return Pose::from_xyz_rpy(vec3(j.at("xyz")), vec3(j.value("rpy", json::array({0, 0, 0})))); }

json pose_to(const Pose& p) {
  const Vec3 rpy = p.rotation().eulerAngles(2, 1, 0);
  return json{{"xyz", to_json(p.position)}, {"rpy", json::array({rpy[2], rpy[1], rpy[0]})}};
}

}  // namespace

RobotModel model_from_json(const json& j) {
  RobotModel m;
  try {
    m.name = j.value("name", "unnamed");
    const json& joints = j.at("joints");
    if (!joints.is_array() || joints.size() != static_cast<std::size_t>(kNumJoints)) {
      throw ValidationError("model must define exactly 6 joints");
    }
    for (int i = 0; i < kNumJoints; ++i) {
      const json& jj = joints[i];
      m.joints[i].name = jj.value("name", "joint" + std::to_string(i + 1));
      m.joints[i].axis = vec3(jj.at("axis"));
      m.joints[i].parent_to_joint = pose_from(jj.at("origin"));
      m.lower[i] = jj.at("limits").at(0).get<double>();
      m.upper[i] = jj.at("limits").at(1).get<double>();
      m.velocity_limits[i] = jj.at("velocity_limit").get<double>();
    }
    for (const json& lj : j.at("links")) {
      LinkGeometry l;
      l.name = lj.value("name", "");
      l.floor_exempt = lj.value("floor_exempt", false);
      for (const json& cj : lj.at("capsules")) {
        l.capsules.push_back(Capsule{vec3(cj.at("a")), vec3(cj.at("b")), cj.at("radius").get<double>()});
      }
      m.links.push_back(std::move(l));
    }
    m.camera_mount = pose_from(j.at("camera_mount"));
    m.reach = j.at("reach").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("robot model config: ") + e.what());
  }
  m.validate();
  return m;
}

json model_to_json(const RobotModel& m) {
  json j;
  j["schema"] = "camarm.robot_model/1";
  j["name"] = m.name;
  json joints = json::array();
  for (int i = 0; i < kNumJoints; ++i) {
    joints.push_back({{"name", m.joints[i].name},
                      {"axis", to_json(m.joints[i].axis)},
                      {"origin", pose_to(m.joints[i].parent_to_joint)},
                      {"limits", json::array({m.lower[i], m.upper[i]})},
                      {"velocity_limit", m.velocity_limits[i]}});
  }
  j["joints"] = joints;
  json links = json::array();
  for (const auto& l : m.links) {
    json caps = json::array();
    for (const auto& c : l.capsules) caps.push_back({{"a", to_json(c.a)}, {"b", to_json(c.b)}, {"radius", c.radius}});
    links.push_back({{"name", l.name}, {"floor_exempt", l.floor_exempt}, {"capsules", caps}});
  }
  j["links"] = links;
  j["camera_mount"] = pose_to(m.camera_mount);
  j["reach"] = m.reach;
  return j;
}

RobotModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open robot model config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("robot model config " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace camarm
