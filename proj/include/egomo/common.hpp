#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace egomo {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using Mat3 = Eigen::Matrix<S, 3, 3>;

using Mat = MatX<double>;
using Vec = VecX<double>;
using Mat3d = Eigen::Matrix3d;
using Vec3d = Eigen::Vector3d;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define EGOMO_ERROR_TYPE(Name) \
  struct Name : Error {        \
    using Error::Error;        \
  }

EGOMO_ERROR_TYPE(DegenerateRotation);
EGOMO_ERROR_TYPE(NotARotation);
EGOMO_ERROR_TYPE(TooShort);
EGOMO_ERROR_TYPE(ShapeMismatch);
EGOMO_ERROR_TYPE(LengthMismatch);
EGOMO_ERROR_TYPE(EmptyCorpus);
EGOMO_ERROR_TYPE(EmptyStream);
EGOMO_ERROR_TYPE(EmptySequence);
EGOMO_ERROR_TYPE(TooFewSamples);
EGOMO_ERROR_TYPE(BadStepCount);
EGOMO_ERROR_TYPE(BadStepPair);
EGOMO_ERROR_TYPE(BadStride);
EGOMO_ERROR_TYPE(BadConfig);
EGOMO_ERROR_TYPE(NonFiniteLoss);
EGOMO_ERROR_TYPE(CorruptManifest);
EGOMO_ERROR_TYPE(MissingArray);
EGOMO_ERROR_TYPE(UnknownScenario);
EGOMO_ERROR_TYPE(ConditionGap);
EGOMO_ERROR_TYPE(IoError);

#undef EGOMO_ERROR_TYPE

}  // namespace egomo
