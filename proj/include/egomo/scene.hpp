#pragma once

#include "egomo/common.hpp"
#include "egomo/motion.hpp"

#include <vector>

namespace egomo {

// Static SLAM feature points, world frame, meters.
struct SceneMap {
  Mat points;  // N x 3

  Eigen::Index size() const { return points.rows(); }
};

// Coarse uniform hash over the scene for box queries; built once per map.
class SceneIndex {
 public:
  explicit SceneIndex(const SceneMap& scene, double cell = 0.5);

  // indices of all points within an axis-aligned box (conservative superset)
  void candidates_in_box(const Vec3d& lo, const Vec3d& hi, std::vector<int>& out) const;

 private:
  const SceneMap* scene_;
  double cell_;
  Vec3d origin_ = Vec3d::Zero();
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::vector<int>> cells_;
  int cell_of(const Vec3d& p) const;
};

constexpr int kVoxelsPerAxis = 10;
constexpr int kVoxelCount = kVoxelsPerAxis * kVoxelsPerAxis * kVoxelsPerAxis;
constexpr double kVolumeHalfExtent = 1.0;   // 2m cube
constexpr double kVolumeDownOffset = 1.0;   // center is 1m below the head
constexpr double kDistanceTruncation = 0.1; // 10cm clamp

// 10x10x10 truncated nearest-point distances around the head; the volume is
// yaw-aligned with the head about the gravity axis.
struct VoxelGrid {
  Vec values = Vec::Constant(kVoxelCount, kDistanceTruncation);  // flat, x fastest
  Vec3d center = Vec3d::Zero();
  double yaw = 0.0;

  static int flat_index(int ix, int iy, int iz) {
    return ix + kVoxelsPerAxis * (iy + kVoxelsPerAxis * iz);
  }
  // voxel center in the local (centered, yaw-removed) frame
  static Vec3d local_center(int ix, int iy, int iz);
};

// crop volume center for a head pose
inline Vec3d volume_center(const SE3Pose& head) {
  return head.t - Vec3d(0, 0, kVolumeDownOffset);
}

// points inside the yaw-aligned 2m cube centered 1m below the head
Mat crop_scene(const SceneMap& scene, const SE3Pose& head);
Mat crop_scene(const SceneMap& scene, const SE3Pose& head, const SceneIndex& index);

VoxelGrid voxelize(const Mat& points, const Vec3d& center, double yaw);

}  // namespace egomo
