#include "egomo/scene.hpp"

#include <algorithm>
#include <cmath>

namespace egomo {

SceneIndex::SceneIndex(const SceneMap& scene, double cell) : scene_(&scene), cell_(cell) {
  if (scene.size() == 0) return;
  const Vec3d lo = scene.points.colwise().minCoeff().transpose();
  const Vec3d hi = scene.points.colwise().maxCoeff().transpose();
  origin_ = lo;
  nx_ = static_cast<int>(std::floor((hi.x() - lo.x()) / cell_)) + 1;
  ny_ = static_cast<int>(std::floor((hi.y() - lo.y()) / cell_)) + 1;
  nz_ = static_cast<int>(std::floor((hi.z() - lo.z()) / cell_)) + 1;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_ * nz_);
  for (int i = 0; i < scene.size(); ++i)
    cells_[cell_of(scene.points.row(i).transpose())].push_back(i);
}

int SceneIndex::cell_of(const Vec3d& p) const {
  auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
  const int ix = clampi(static_cast<int>(std::floor((p.x() - origin_.x()) / cell_)), nx_);
  const int iy = clampi(static_cast<int>(std::floor((p.y() - origin_.y()) / cell_)), ny_);
  const int iz = clampi(static_cast<int>(std::floor((p.z() - origin_.z()) / cell_)), nz_);
  return ix + nx_ * (iy + ny_ * iz);
}

void SceneIndex::candidates_in_box(const Vec3d& lo, const Vec3d& hi,
                                   std::vector<int>& out) const {
  out.clear();
  if (cells_.empty()) return;
  auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
  const int x0 = clampi(static_cast<int>(std::floor((lo.x() - origin_.x()) / cell_)), nx_);
  const int y0 = clampi(static_cast<int>(std::floor((lo.y() - origin_.y()) / cell_)), ny_);
  const int z0 = clampi(static_cast<int>(std::floor((lo.z() - origin_.z()) / cell_)), nz_);
  const int x1 = clampi(static_cast<int>(std::floor((hi.x() - origin_.x()) / cell_)), nx_);
  const int y1 = clampi(static_cast<int>(std::floor((hi.y() - origin_.y()) / cell_)), ny_);
  const int z1 = clampi(static_cast<int>(std::floor((hi.z() - origin_.z()) / cell_)), nz_);
  for (int iz = z0; iz <= z1; ++iz)
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) {
        const auto& bucket = cells_[ix + nx_ * (iy + ny_ * iz)];
        out.insert(out.end(), bucket.begin(), bucket.end());
      }
}

Vec3d VoxelGrid::local_center(int ix, int iy, int iz) {
  const double pitch = 2.0 * kVolumeHalfExtent / kVoxelsPerAxis;
  auto coord = [pitch](int i) { return -kVolumeHalfExtent + pitch * (i + 0.5); };
  return {coord(ix), coord(iy), coord(iz)};
}

namespace {

Mat crop_points(const SceneMap& scene, const SE3Pose& head, const std::vector<int>* subset) {
  const Vec3d center = volume_center(head);
  const Mat3d unrotate = yaw_rotation(-yaw_of<double>(head.R));
  std::vector<int> keep;
  auto consider = [&](int i) {
    const Vec3d local = unrotate * (scene.points.row(i).transpose() - center);
    if (local.array().abs().maxCoeff() <= kVolumeHalfExtent) keep.push_back(i);
  };
  if (subset) {
    for (int i : *subset) consider(i);
  } else {
    for (int i = 0; i < scene.size(); ++i) consider(i);
  }
  Mat out(static_cast<Eigen::Index>(keep.size()), 3);
  for (std::size_t k = 0; k < keep.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = scene.points.row(keep[k]);
  return out;
}

}  // namespace

Mat crop_scene(const SceneMap& scene, const SE3Pose& head) {
  return crop_points(scene, head, nullptr);
}

Mat crop_scene(const SceneMap& scene, const SE3Pose& head, const SceneIndex& index) {
  // conservative enclosing box of the rotated cube has half extent sqrt(2)
  const Vec3d center = volume_center(head);
  const double r = kVolumeHalfExtent * std::sqrt(2.0) + 1e-9;
  const Vec3d pad(r, r, kVolumeHalfExtent + 1e-9);
  std::vector<int> cand;
  index.candidates_in_box(center - pad, center + pad, cand);
  return crop_points(scene, head, &cand);
}

VoxelGrid voxelize(const Mat& points, const Vec3d& center, double yaw) {
  VoxelGrid grid;
  grid.center = center;
  grid.yaw = yaw;
  grid.values.setConstant(kDistanceTruncation);
  if (points.rows() == 0) return grid;

  // The truncation radius equals the voxel half pitch, so only points inside
  // a voxel's own cell can fall below the clamp; bucket points by cell and
  // take per-cell minima.
  const Mat3d unrotate = yaw_rotation(-yaw);
  const double pitch = 2.0 * kVolumeHalfExtent / kVoxelsPerAxis;
  std::vector<std::vector<Vec3d>> buckets(kVoxelCount);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vec3d local = unrotate * (points.row(i).transpose() - center);
    if (local.array().abs().maxCoeff() > kVolumeHalfExtent + pitch) continue;
    auto idx = [pitch](double x) {
      return std::clamp(static_cast<int>(std::floor((x + kVolumeHalfExtent) / pitch)), 0,
                        kVoxelsPerAxis - 1);
    };
    buckets[VoxelGrid::flat_index(idx(local.x()), idx(local.y()), idx(local.z()))].push_back(
        local);
  }
  for (int iz = 0; iz < kVoxelsPerAxis; ++iz)
    for (int iy = 0; iy < kVoxelsPerAxis; ++iy)
      for (int ix = 0; ix < kVoxelsPerAxis; ++ix) {
        const int f = VoxelGrid::flat_index(ix, iy, iz);
        const Vec3d vc = VoxelGrid::local_center(ix, iy, iz);
        double best = kDistanceTruncation;
        for (const Vec3d& p : buckets[f]) best = std::min(best, (p - vc).norm());
        grid.values[f] = best;
      }
  return grid;
}

}  // namespace egomo
