#pragma once

#include <cstdint>
#include <vector>

namespace qsat {

// Dense row-major float matrix. The workhorse value type of the network
// kernels; no views, no strides.
struct MatF {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<float> v;

  MatF() = default;
  MatF(std::int64_t r, std::int64_t c, float fill = 0.0f)
      : rows(r), cols(c), v(static_cast<std::size_t>(r * c), fill) {}

  float& at(std::int64_t r, std::int64_t c) { return v[static_cast<std::size_t>(r * cols + c)]; }
  float at(std::int64_t r, std::int64_t c) const { return v[static_cast<std::size_t>(r * cols + c)]; }
  float* row(std::int64_t r) { return v.data() + r * cols; }
  const float* row(std::int64_t r) const { return v.data() + r * cols; }
  std::int64_t size() const { return rows * cols; }

  bool operator==(const MatF&) const = default;
};

}  // namespace qsat
