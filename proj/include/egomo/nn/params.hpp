#pragma once

#include "egomo/common.hpp"
#include "egomo/rng.hpp"

#include <string>
#include <vector>

namespace egomo::nn {

// All weights of a model live in one flat vector; layers hold handles to
// named (rows x cols) segments. Gradients use separate flat buffers with the
// same layout, which keeps optimizer steps and finite-difference probes
// trivial.
template <class S>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Eigen::Index rows = 0, cols = 0, offset = 0;
  };

  int add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (finalized_) throw BadConfig("ParamStore: add after finalize");
    Entry e{name, rows, cols, total_};
    total_ += rows * cols;
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
  }

  void finalize() {
    data_.setZero(total_);
    finalized_ = true;
  }

  Eigen::Index size() const { return total_; }
  bool finalized() const { return finalized_; }
  const std::vector<Entry>& entries() const { return entries_; }

  VecX<S>& data() { return data_; }
  const VecX<S>& data() const { return data_; }

  Eigen::Map<MatX<S>> mat(int h) {
    const Entry& e = entries_[static_cast<std::size_t>(h)];
    return {data_.data() + e.offset, e.rows, e.cols};
  }
  Eigen::Map<const MatX<S>> mat(int h) const {
    const Entry& e = entries_[static_cast<std::size_t>(h)];
    return {data_.data() + e.offset, e.rows, e.cols};
  }

  // view of the matching segment inside an external flat buffer
  Eigen::Map<MatX<S>> in(VecX<S>& buf, int h) const {
    const Entry& e = entries_[static_cast<std::size_t>(h)];
    return {buf.data() + e.offset, e.rows, e.cols};
  }

  VecX<S> zeros_like() const { return VecX<S>::Zero(total_); }

  void fill_normal(int h, Rng& rng, double stddev) {
    auto m = mat(h);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        m(i, j) = static_cast<S>(stddev * rng.gaussian());
  }

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return static_cast<int>(i);
    return -1;
  }

 private:
  std::vector<Entry> entries_;
  Eigen::Index total_ = 0;
  VecX<S> data_;
  bool finalized_ = false;
};

}  // namespace egomo::nn
