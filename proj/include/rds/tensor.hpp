#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace rds {

using Index = Eigen::Index;
using Array = Eigen::ArrayXd;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return s.empty() ? 0 : n;
}

/// Dense real-valued array with an explicit shape (vector or 2-D image).
/// Storage is a flat row-major Eigen array of doubles; all elementwise
/// math goes through array() so Eigen expressions compose without copies.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Array::Zero(shape_size(shape_))) {
    check_shape();
  }

  Tensor(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_size(shape_))
      throw std::invalid_argument("Tensor: data length does not match shape");
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor constant(Shape shape, double value) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.check_shape();
    t.data_ = Array::Constant(shape_size(t.shape_), value);
    return t;
  }

  static Tensor vector(std::initializer_list<double> values) {
    Tensor t;
    t.shape_ = {static_cast<Index>(values.size())};
    t.data_.resize(static_cast<Index>(values.size()));
    Index i = 0;
    for (double v : values) t.data_[i++] = v;
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return data_.size(); }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }

  // 2-D row-major access
  Index rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? shape_[0] : 0); }
  Index cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? Index{1} : 0); }
  double operator()(Index r, Index c) const { return data_[r * shape_[1] + c]; }
  double& operator()(Index r, Index c) { return data_[r * shape_[1] + c]; }

  double operator[](Index i) const { return data_[i]; }
  double& operator[](Index i) { return data_[i]; }

  Array& array() { return data_; }
  const Array& array() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const { return data_.isFinite().all(); }

  /// New tensor with this shape and the given flat data.
  Tensor with_values(Array values) const { return Tensor(shape_, std::move(values)); }

 private:
  void check_shape() const {
    for (Index d : shape_)
      if (d <= 0) throw std::invalid_argument("Tensor: shape dimensions must be positive");
  }

  Shape shape_;
  Array data_;
};

std::string shape_string(const Shape& s);

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);
void require_shape(const Tensor& t, const Shape& expected, const char* where);
void require_finite(const Tensor& t, const char* where);

inline double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  return (a.array() * b.array()).sum();
}

inline double squared_norm(const Tensor& a) { return a.array().square().sum(); }
inline double norm(const Tensor& a) { return std::sqrt(squared_norm(a)); }

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator+");
  return a.with_values(a.array() + b.array());
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator-");
  return a.with_values(a.array() - b.array());
}

inline Tensor operator*(double s, const Tensor& a) { return a.with_values(s * a.array()); }

}  // namespace rds
