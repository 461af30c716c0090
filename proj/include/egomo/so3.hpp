#pragma once

#include "egomo/common.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace egomo {

// 6D rotation layout: (first column, second column) of the rotation matrix,
// completed by Gram-Schmidt and a cross product.
template <class S>
Mat3<S> rot6d_to_matrix(const Eigen::Matrix<S, 6, 1>& r6) {
  const Vec3<S> a = r6.template head<3>();
  const Vec3<S> b = r6.template tail<3>();
  const S na = a.norm();
  if (!(na > S(1e-8))) throw DegenerateRotation("rot6d: first column near zero");
  const Vec3<S> c0 = a / na;
  Vec3<S> c1 = b - b.dot(c0) * c0;
  const S n1 = c1.norm();
  if (!(n1 > S(1e-8)))
    throw DegenerateRotation("rot6d: columns near parallel or second column near zero");
  c1 /= n1;
  Mat3<S> r;
  r.col(0) = c0;
  r.col(1) = c1;
  r.col(2) = c0.cross(c1);
  return r;
}

template <class S>
Eigen::Matrix<S, 6, 1> matrix_to_rot6d(const Mat3<S>& r) {
  const S ortho = (r.transpose() * r - Mat3<S>::Identity()).template lpNorm<Eigen::Infinity>();
  if (!(ortho < S(1e-5)) || !(r.determinant() > S(0)))
    throw NotARotation("matrix_to_rot6d: input is not a rotation");
  Eigen::Matrix<S, 6, 1> r6;
  r6.template head<3>() = r.col(0);
  r6.template tail<3>() = r.col(1);
  return r6;
}

// axis-angle vector of a rotation matrix (theta * unit axis)
template <class S>
Vec3<S> log_so3(const Mat3<S>& r) {
  const Eigen::AngleAxis<S> aa(r);
  return aa.angle() * aa.axis();
}

template <class S>
Mat3<S> exp_so3(const Vec3<S>& w) {
  const S angle = w.norm();
  if (angle < S(1e-14)) return Mat3<S>::Identity();
  return Eigen::AngleAxis<S>(angle, w / angle).toRotationMatrix();
}

// Heading about the world Z (gravity) axis: angle of the rotated X axis
// projected to the horizontal plane.
template <class S>
S yaw_of(const Mat3<S>& r) {
  return std::atan2(r(1, 0), r(0, 0));
}

template <class S>
Mat3<S> yaw_rotation(S yaw) {
  return Eigen::AngleAxis<S>(yaw, Vec3<S>::UnitZ()).toRotationMatrix();
}

}  // namespace egomo
