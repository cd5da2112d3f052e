#include "rds/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace rds {

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << "]";
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch " + shape_string(a.shape()) +
                                " vs " + shape_string(b.shape()));
}

void require_shape(const Tensor& t, const Shape& expected, const char* where) {
  if (t.shape() != expected)
    throw std::invalid_argument(std::string(where) + ": expected shape " + shape_string(expected) +
                                ", got " + shape_string(t.shape()));
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite())
    throw std::invalid_argument(std::string(where) + ": tensor contains NaN or Inf");
}

}  // namespace rds
