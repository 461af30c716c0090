#pragma once

#include "egomo/common.hpp"

#include <string>
#include <vector>

namespace egomo {

// 23-joint ball-and-socket skeleton (Xsens-style segment topology).
// Offsets are T-pose bone vectors in meters, Z up, X forward.
struct Skeleton {
  static constexpr int kJointCount = 23;

  std::vector<std::string> names;   // size 23
  std::vector<int> parent;          // -1 for the root (pelvis)
  Mat offsets;                      // 23 x 3
  int head_joint = -1;
  std::vector<int> wrist_joints;    // 2 entries
  std::vector<int> foot_joints;     // ankles + toes
  std::vector<bool> upper_body;     // region masks; head and root excluded
  std::vector<bool> lower_body;     // from both regions
  std::string version;

  int joint_count() const { return static_cast<int>(parent.size()); }
  void validate() const;  // throws BadConfig on a malformed table

  // built-in default table; `scale` multiplies all bone offsets
  static Skeleton xsens23(double scale = 1.0);
};

Skeleton load_skeleton(const std::string& path);
void save_skeleton(const Skeleton& skel, const std::string& path);

}  // namespace egomo
