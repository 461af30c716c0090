#pragma once

#include "egomo/common.hpp"
#include "egomo/skeleton.hpp"
#include "egomo/so3.hpp"

#include <vector>

namespace egomo {

struct SE3Pose {
  Vec3d t = Vec3d::Zero();
  Mat3d R = Mat3d::Identity();

  SE3Pose() = default;
  SE3Pose(const Vec3d& t_, const Mat3d& R_) : t(t_), R(R_) {}

  static SE3Pose Identity() { return SE3Pose(); }

  SE3Pose operator*(const SE3Pose& rhs) const { return {t + R * rhs.t, R * rhs.R}; }
  Vec3d operator*(const Vec3d& p) const { return t + R * p; }
  SE3Pose inverse() const { return {-(R.transpose() * t), R.transpose()}; }
};

// Per-frame head feature rows [t(3) | rot6d(6) | v(3) | w(3)], canonicalized
// to the window's first frame (translation and heading removed, gravity kept).
struct HeadFeatureWindow {
  static constexpr int kFeatureDim = 15;
  Mat features;     // T x 15
  SE3Pose anchor;   // removed yaw+translation transform
  double dt = 1.0 / 60.0;

  Eigen::Index frames() const { return features.rows(); }
};

// T x F window of local joint rotations in 6D form, F = 23*6.
template <class S>
using MotionMat = MatX<S>;

struct WorldMotion {
  std::vector<SE3Pose> root;  // per-frame solved root transform
  Mat positions;              // T x (23*3), joint world positions in meters

  Eigen::Index frames() const { return positions.rows(); }
  Vec3d joint(Eigen::Index frame, int j) const {
    return positions.row(frame).segment<3>(3 * j).transpose();
  }
};

// velocities by central differences (one-sided at the ends)
void finite_diff_velocities(const std::vector<SE3Pose>& poses, double dt,
                            std::vector<Vec3d>& v, std::vector<Vec3d>& w);

// removes the first frame's translation and heading; pitch/roll and the
// gravity axis are preserved
std::vector<SE3Pose> canonicalize_poses(const std::vector<SE3Pose>& poses, SE3Pose& anchor);

HeadFeatureWindow canonicalize_window(const std::vector<SE3Pose>& poses, double dt);

// joint world positions for one frame of local rotations
Mat forward_kinematics(const Skeleton& skel, const std::vector<Mat3d>& local_rots,
                       const SE3Pose& root);

// positions and world orientations in one pass
void forward_kinematics_full(const Skeleton& skel, const std::vector<Mat3d>& local_rots,
                             const SE3Pose& root, Mat& positions, std::vector<Mat3d>& rotations);

std::vector<Mat3d> decode_frame_rotations(const Eigen::Ref<const Vec>& row);
Vec encode_frame_rotations(const std::vector<Mat3d>& rots);

// Solves the per-frame root transform so the kinematic head pose lands on
// head_traj[i] * calib, then runs FK.
WorldMotion stitch_to_head(const Mat& motion, const std::vector<SE3Pose>& head_traj,
                           const Skeleton& skel, const SE3Pose& calib);

}  // namespace egomo
