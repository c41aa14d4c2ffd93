#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace editsql {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles; vectors are cols == 1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::size_t r, std::size_t c = 1)
      : rows(r), cols(c), v(r * c, 0.0) {}

  std::size_t size() const { return rows * cols; }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// splitmix64; used wherever a cheap keyed deterministic stream is needed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace editsql
