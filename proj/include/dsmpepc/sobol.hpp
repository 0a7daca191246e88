#pragma once

/// \file
/// Digitally shifted 4-D Sobol sequence (Joe-Kuo direction numbers).

#include <array>
#include <cstdint>
#include <random>

namespace dsmpepc {

class Sobol4 {
 public:
  static constexpr int kDims = 4;

  /// `seed` selects the random digital shift; seed 0 gives the unscrambled sequence.
  explicit Sobol4(std::uint64_t seed = 0) {
    struct Poly {
      int s;
      unsigned a;
      std::array<std::uint32_t, 3> m;
    };
    constexpr std::array<Poly, 3> polys{{{1, 0u, {1, 0, 0}}, {2, 1u, {1, 3, 0}}, {3, 1u, {1, 3, 1}}}};
    for (int k = 0; k < 32; ++k) dirs_[0][k] = 1u << (31 - k);
    for (int d = 1; d < kDims; ++d) {
      const Poly& p = polys[d - 1];
      auto& v = dirs_[d];
      for (int i = 0; i < p.s; ++i) v[i] = p.m[i] << (31 - i);
      for (int i = p.s; i < 32; ++i) {
        v[i] = v[i - p.s] ^ (v[i - p.s] >> p.s);
        for (int k = 1; k < p.s; ++k)
          if ((p.a >> (p.s - 1 - k)) & 1u) v[i] ^= v[i - k];
      }
    }
    if (seed != 0) {
      std::mt19937_64 rng(seed);
      for (auto& s : shift_) s = static_cast<std::uint32_t>(rng() >> 32);
    }
  }

  /// Next point in [0, 1)^4.
  std::array<double, kDims> next() {
    std::array<double, kDims> u{};
    for (int d = 0; d < kDims; ++d) u[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1p-32;
    // Gray-code step: flip the direction number at the lowest zero bit of the index
    int c = 0;
    for (std::uint64_t n = index_; n & 1u; n >>= 1) ++c;
    for (int d = 0; d < kDims; ++d) state_[d] ^= dirs_[d][c];
    ++index_;
    return u;
  }

 private:
  std::array<std::array<std::uint32_t, 32>, kDims> dirs_{};
  std::array<std::uint32_t, kDims> state_{};
  std::array<std::uint32_t, kDims> shift_{};
  std::uint64_t index_ = 0;
};

}  // namespace dsmpepc
