#include "egomo/motion.hpp"

namespace egomo {

void finite_diff_velocities(const std::vector<SE3Pose>& poses, double dt,
                            std::vector<Vec3d>& v, std::vector<Vec3d>& w) {
  const std::size_t n = poses.size();
  if (n < 2) throw TooShort("finite_diff_velocities: need at least 2 poses");
  if (!(dt > 0.0)) throw BadConfig("finite_diff_velocities: dt must be positive");
  v.assign(n, Vec3d::Zero());
  w.assign(n, Vec3d::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    // central in the interior, one-sided at the ends
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == n) ? n - 1 : i + 1;
    const double span = static_cast<double>(hi - lo) * dt;
    v[i] = (poses[hi].t - poses[lo].t) / span;
    w[i] = log_so3<double>(poses[lo].R.transpose() * poses[hi].R) / span;
  }
}

std::vector<SE3Pose> canonicalize_poses(const std::vector<SE3Pose>& poses, SE3Pose& anchor) {
  if (poses.empty()) throw TooShort("canonicalize: empty window");
  anchor = SE3Pose(poses[0].t, yaw_rotation(yaw_of<double>(poses[0].R)));
  const SE3Pose inv = anchor.inverse();
  std::vector<SE3Pose> out;
  out.reserve(poses.size());
  for (const auto& p : poses) out.push_back(inv * p);
  return out;
}

HeadFeatureWindow canonicalize_window(const std::vector<SE3Pose>& poses, double dt) {
  HeadFeatureWindow win;
  win.dt = dt;
  const auto canon = canonicalize_poses(poses, win.anchor);
  const Eigen::Index n = static_cast<Eigen::Index>(canon.size());
  win.features.resize(n, HeadFeatureWindow::kFeatureDim);
  if (n == 1) {
    win.features.row(0).segment<3>(9).setZero();
    win.features.row(0).segment<3>(12).setZero();
  } else {
    std::vector<Vec3d> v, w;
    finite_diff_velocities(canon, dt, v, w);
    for (Eigen::Index i = 0; i < n; ++i) {
      win.features.row(i).segment<3>(9) = v[i].transpose();
      win.features.row(i).segment<3>(12) = w[i].transpose();
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    win.features.row(i).segment<3>(0) = canon[i].t.transpose();
    win.features.row(i).segment<6>(3) = matrix_to_rot6d<double>(canon[i].R).transpose();
  }
  return win;
}

void forward_kinematics_full(const Skeleton& skel, const std::vector<Mat3d>& local_rots,
                             const SE3Pose& root, Mat& positions,
                             std::vector<Mat3d>& rotations) {
  const int n = skel.joint_count();
  if (static_cast<int>(local_rots.size()) != n)
    throw ShapeMismatch("forward_kinematics: rotation count != joint count");
  positions.resize(n, 3);
  rotations.assign(n, Mat3d::Identity());
  positions.row(0) = root.t.transpose();
  rotations[0] = root.R * local_rots[0];
  for (int j = 1; j < n; ++j) {
    const int p = skel.parent[j];
    positions.row(j) =
        positions.row(p) + (rotations[p] * skel.offsets.row(j).transpose()).transpose();
    rotations[j] = rotations[p] * local_rots[j];
  }
}

Mat forward_kinematics(const Skeleton& skel, const std::vector<Mat3d>& local_rots,
                       const SE3Pose& root) {
  Mat positions;
  std::vector<Mat3d> rotations;
  forward_kinematics_full(skel, local_rots, root, positions, rotations);
  return positions;
}

std::vector<Mat3d> decode_frame_rotations(const Eigen::Ref<const Vec>& row) {
  if (row.size() % 6 != 0) throw ShapeMismatch("rotation row size not a multiple of 6");
  const int n = static_cast<int>(row.size() / 6);
  std::vector<Mat3d> rots(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Matrix<double, 6, 1> r6 = row.segment<6>(6 * j);
    rots[j] = rot6d_to_matrix<double>(r6);
  }
  return rots;
}

Vec encode_frame_rotations(const std::vector<Mat3d>& rots) {
  Vec row(static_cast<Eigen::Index>(rots.size()) * 6);
  for (std::size_t j = 0; j < rots.size(); ++j)
    row.segment<6>(static_cast<Eigen::Index>(6 * j)) = matrix_to_rot6d<double>(rots[j]);
  return row;
}

WorldMotion stitch_to_head(const Mat& motion, const std::vector<SE3Pose>& head_traj,
                           const Skeleton& skel, const SE3Pose& calib) {
  const Eigen::Index frames = motion.rows();
  if (frames != static_cast<Eigen::Index>(head_traj.size()))
    throw LengthMismatch("stitch_to_head: motion and head trajectory lengths differ");
  if (motion.cols() != skel.joint_count() * 6)
    throw ShapeMismatch("stitch_to_head: motion width != 6 * joint count");

  WorldMotion out;
  out.root.resize(frames);
  out.positions.resize(frames, skel.joint_count() * 3);
  Mat rel_pos;
  std::vector<Mat3d> rel_rot, world_rot;
  Mat pos;
  for (Eigen::Index i = 0; i < frames; ++i) {
    const auto rots = decode_frame_rotations(motion.row(i).transpose());
    forward_kinematics_full(skel, rots, SE3Pose::Identity(), rel_pos, rel_rot);
    const SE3Pose target = head_traj[i] * calib;
    SE3Pose root;
    root.R = target.R * rel_rot[skel.head_joint].transpose();
    root.t = target.t - root.R * rel_pos.row(skel.head_joint).transpose();
    forward_kinematics_full(skel, rots, root, pos, world_rot);
    out.root[i] = root;
    for (int j = 0; j < skel.joint_count(); ++j)
      out.positions.row(i).segment<3>(3 * j) = pos.row(j);
  }
  return out;
}

}  // namespace egomo
