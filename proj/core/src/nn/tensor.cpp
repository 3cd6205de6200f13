#include "pansr/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "pansr/error.hpp"

namespace pansr::nn {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
         "," + std::to_string(w) + ")";
}

Tensor Tensor::sample(int n) const {
  Tensor out(Shape{1, shape_.c, shape_.h, shape_.w});
  std::copy_n(sample_ptr(n), shape_.sample(), out.data());
  return out;
}

void Tensor::set_sample(int n, const Tensor& one) {
  if (one.shape().c != shape_.c || one.shape().h != shape_.h || one.shape().w != shape_.w)
    throw ValidationError("set_sample: shape " + one.shape().str() + " does not fit " +
                          shape_.str());
  std::copy_n(one.data(), shape_.sample(), sample_ptr(n));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor concat_batch(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  Shape s = parts.front().shape();
  int total = 0;
  for (const auto& p : parts) {
    const Shape& q = p.shape();
    if (q.c != s.c || q.h != s.h || q.w != s.w)
      throw ValidationError("concat_batch: mismatched shapes " + s.str() + " vs " + q.str());
    total += q.n;
  }
  s.n = total;
  Tensor out(s);
  double* dst = out.data();
  for (const auto& p : parts) dst = std::copy(p.data(), p.data() + p.size(), dst);
  return out;
}

}  // namespace pansr::nn
