#include "camarm/eval/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace camarm {

std::string camera_paths_svg(const RobotModel& model, const Scene& scene, const std::vector<TrialRecord>& records,
                             int width, int height) {
  // World window: x in [-0.2, 1.0], y in [-0.6, 0.6]; +x up the page.
  const double x0 = -0.2, x1 = 1.0, y0 = -0.6, y1 = 0.6;
  const double s = std::min(height / (x1 - x0), width / (y1 - y0));
  auto px = [&](const Vec3& p) { return std::pair<double, double>{width * 0.5 - p.y() * s, height - (p.x() - x0) * s}; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::map<std::string, int> colors;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (scene.obstacle_present) {
    const Vec3 lo = scene.obstacle.center - scene.obstacle.half(), hi = scene.obstacle.center + scene.obstacle.half();
    const auto a = px(Vec3(hi.x(), hi.y(), 0)), b = px(Vec3(lo.x(), lo.y(), 0));
    os << "<rect x=\"" << a.first << "\" y=\"" << a.second << "\" width=\"" << b.first - a.first << "\" height=\""
       << b.second - a.second << "\" fill=\"#bbbbbb\"/>\n";
  }
  const auto t = px(scene.target.position);
  os << "<circle cx=\"" << t.first << "\" cy=\"" << t.second << "\" r=\"" << scene.target.radius * s
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& r : records) {
    if (r.joints.empty()) continue;
    auto [it, fresh] = colors.emplace(r.method, static_cast<int>(colors.size()));
    os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << palette[it->second % 6] << "\" points=\"";
    for (std::size_t k = 0; k < r.joints.size(); k += 10) {
      const auto p = px(camera_pose(model, r.joints[k]).position);
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", p.first, p.second);
      os << buf;
    }
    os << "\"/>\n";
  }
  int row = 0;
  for (const auto& [name, c] : colors)
    os << "<text x=\"8\" y=\"" << 16 + 14 * row++ << "\" font-size=\"12\" fill=\"" << palette[c % 6] << "\">" << name
       << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace camarm
