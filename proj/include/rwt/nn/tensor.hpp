#pragma once

#include <cstddef>
#include <new>
#include <string>
#include <vector>

namespace rwt::nn {

// Fixed 64-byte base alignment. Vectorised Eigen kernels peel unaligned
// heads, so an address-dependent alignment would change summation order from
// run to run.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

// NCHW extents.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t sample_size() const {
    return static_cast<std::size_t>(c) * h * w;
  }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Dense float tensor in NCHW order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f)
      : shape_(shape), data_(shape.size(), fill) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float* sample(int n) { return data_.data() + n * shape_.sample_size(); }
  const float* sample(int n) const {
    return data_.data() + n * shape_.sample_size();
  }

  float& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const {
    return data_[offset(n, c, y, x)];
  }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  FloatBuffer& values() { return data_; }
  const FloatBuffer& values() const { return data_; }

  void fill(float v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
               shape_.w +
           x;
  }
  Shape shape_;
  FloatBuffer data_;
};

// A trainable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Shape s)
      : name(std::move(n)), value(s), grad(s) {}

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0f); }
};

// Non-trainable persistent state (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor* tensor = nullptr;
};

}  // namespace rwt::nn
