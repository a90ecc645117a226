#pragma once

#include <string>
#include <vector>

#include "camarm/eval/rollout.hpp"

namespace camarm {

// Top-down (x, y) view: obstacle footprint, target, and one camera path per
// record, colored by method.
std::string camera_paths_svg(const RobotModel& model, const Scene& scene, const std::vector<TrialRecord>& records,
                             int width = 640, int height = 480);

}  // namespace camarm
