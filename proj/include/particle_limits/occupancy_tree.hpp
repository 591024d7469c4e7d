#ifndef PARTICLE_LIMITS_OCCUPANCY_TREE_HPP
#define PARTICLE_LIMITS_OCCUPANCY_TREE_HPP

#include <array>
#include <cstddef>
#include <vector>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace particle_limits {

/// Sampling tree over per-site weights with fanout 16: each node stores the
/// running cumulative sums of its 16 children, so selection is one
/// compare-and-count pass per level (two levels cover 256 sites) instead of
/// a binary descent whose random branch path defeats prediction.
///
/// Intended for integer-valued weights (occupation numbers): point updates
/// add exact integers, so the cached sums never drift and no rebuild is
/// needed. The AVX2 and scalar paths perform the same IEEE operations and
/// give bitwise-equal results.
class OccupancyTree {
 public:
  static constexpr std::size_t kFanout = 16;
  /// Lattices up to this many sites use one flat cumulative node, which
  /// turns selection into a single parallel compare-count pass and a walk
  /// jump into a one- or two-vector window update.
  static constexpr std::size_t kWideWidth = 128;

  explicit OccupancyTree(std::size_t size)
      : size_(size), wide_(size > kFanout && size <= kWideWidth) {
    if (wide_) {
      levels_ = 1;
      level_offset_[0] = 0;
      storage_.assign(kWideWidth, 0.0);
      leaves_.assign(size_, 0.0);
      return;
    }
    levels_ = 1;
    std::size_t capacity = kFanout;
    while (capacity < size_) {
      capacity *= kFanout;
      ++levels_;
    }
    std::size_t total_slots = 0;
    std::size_t width = kFanout;
    for (std::size_t l = 0; l < levels_; ++l) {
      level_offset_[l] = total_slots;
      total_slots += width;
      width *= kFanout;
    }
    storage_.assign(total_slots, 0.0);
    leaves_.assign(size_, 0.0);
  }

  std::size_t size() const { return size_; }
  double total() const {
    return wide_ ? storage_[kWideWidth - 1] : storage_[kFanout - 1];
  }
  double leaf(std::size_t i) const { return leaves_[i]; }

  /// Adds delta to leaf i: one suffix update per level.
  void add(std::size_t i, double delta) {
    leaves_[i] += delta;
    if (wide_) {
      wide_suffix_add(storage_.data(), i, delta);
      return;
    }
    std::size_t child = i;
    for (std::size_t l = levels_; l-- > 0;) {
      double* node = storage_.data() + level_offset_[l] + (child / kFanout) * kFanout;
      suffix_add(node, child % kFanout, delta);
      child /= kFanout;
    }
  }

  /// Moves one unit of weight from leaf `from` to leaf `to`. Once the two
  /// update paths share a node the net change above it is zero, so nearby
  /// sites (the common case for walk jumps) touch a single node.
  void move_unit(std::size_t from, std::size_t to) {
    leaves_[from] -= 1.0;
    leaves_[to] += 1.0;
    if (wide_) {
      if (from < to) {
        wide_range_add(storage_.data(), from, to, -1.0);
      } else {
        wide_range_add(storage_.data(), to, from, 1.0);
      }
      return;
    }
    std::size_t cf = from;
    std::size_t ct = to;
    for (std::size_t l = levels_; l-- > 0;) {
      const std::size_t nf = cf / kFanout;
      const std::size_t nt = ct / kFanout;
      double* level = storage_.data() + level_offset_[l];
      if (nf == nt) {
        double* node = level + nf * kFanout;
        const std::size_t jf = cf % kFanout;
        const std::size_t jt = ct % kFanout;
        if (jf < jt) {
          range_add(node, jf, jt, -1.0);
        } else {
          range_add(node, jt, jf, 1.0);
        }
        return;  // ancestors see -1 + 1 = 0
      }
      suffix_add(level + nf * kFanout, cf % kFanout, -1.0);
      suffix_add(level + nt * kFanout, ct % kFanout, 1.0);
      cf = nf;
      ct = nt;
    }
  }

  struct Sample {
    std::size_t index;
    /// Leftover cumulative weight inside the chosen leaf; uniform on
    /// [0, leaf) given the leaf.
    double residual;
  };

  /// Leaf owning cumulative weight `target` in [0, total). A roundoff
  /// overshoot lands on the last positive leaf with residual 0.
  Sample sample(double target) const {
    std::size_t index = 0;
    if (wide_) {
      const double* node = storage_.data();
      index = wide_count_not_above(node, target);
      if (index >= kWideWidth) index = kWideWidth - 1;
      if (index > 0) target -= node[index - 1];
    } else {
      for (std::size_t l = 0; l < levels_; ++l) {
        const double* node = storage_.data() + level_offset_[l] + index * kFanout;
        std::size_t k = count_not_above(node, target);
        if (k >= kFanout) k = kFanout - 1;
        if (k > 0) target -= node[k - 1];
        index = index * kFanout + k;
      }
    }
    if (index >= size_ || leaves_[index] <= 0.0) {
      std::size_t i = index < size_ ? index : size_ - 1;
      while (i > 0 && leaves_[i] <= 0.0) --i;
      return {i, 0.0};
    }
    if (target > leaves_[index]) target = leaves_[index];
    return {index, target};
  }

 private:
  /// Number of children whose cumulative sum is <= target.
  static std::size_t count_not_above(const double* cum, double target) {
#if defined(__AVX512F__)
    const __m512d t = _mm512_set1_pd(target);
    const auto lo = _mm512_cmp_pd_mask(_mm512_loadu_pd(cum), t, _CMP_LE_OQ);
    const auto hi = _mm512_cmp_pd_mask(_mm512_loadu_pd(cum + 8), t, _CMP_LE_OQ);
    return static_cast<std::size_t>(__builtin_popcount(
        (static_cast<unsigned>(hi) << 8) | static_cast<unsigned>(lo)));
#elif defined(__AVX2__)
    const __m256d t = _mm256_set1_pd(target);
    unsigned bits = 0;
    for (int block = 0; block < 4; ++block) {
      const __m256d c = _mm256_loadu_pd(cum + 4 * block);
      bits |= static_cast<unsigned>(
                  _mm256_movemask_pd(_mm256_cmp_pd(c, t, _CMP_LE_OQ)))
              << (4 * block);
    }
    return static_cast<std::size_t>(__builtin_popcount(bits));
#else
    std::size_t count = 0;
    for (std::size_t j = 0; j < kFanout; ++j) count += cum[j] <= target ? 1 : 0;
    return count;
#endif
  }

  /// 0/1 indicator rows: row j selects child slots >= j.
  static const double* suffix_pattern(std::size_t j) {
    static const auto table = [] {
      std::array<std::array<double, kFanout>, kFanout> t{};
      for (std::size_t row = 0; row < kFanout; ++row) {
        for (std::size_t col = 0; col < kFanout; ++col) {
          t[row][col] = col >= row ? 1.0 : 0.0;
        }
      }
      return t;
    }();
    return table[j].data();
  }

  /// Adds delta to the cumulative entries j..15 of one node.
  static void suffix_add(double* cum, std::size_t j, double delta) {
    const double* pattern = suffix_pattern(j);
#if defined(__AVX512F__)
    const __m512d d = _mm512_set1_pd(delta);
    for (int block = 0; block < 2; ++block) {
      double* p = cum + 8 * block;
      const __m512d masked = _mm512_mul_pd(d, _mm512_loadu_pd(pattern + 8 * block));
      _mm512_storeu_pd(p, _mm512_add_pd(_mm512_loadu_pd(p), masked));
    }
#elif defined(__AVX2__)
    const __m256d d = _mm256_set1_pd(delta);
    for (int block = 0; block < 4; ++block) {
      double* p = cum + 4 * block;
      const __m256d masked = _mm256_mul_pd(d, _mm256_loadu_pd(pattern + 4 * block));
      _mm256_storeu_pd(p, _mm256_add_pd(_mm256_loadu_pd(p), masked));
    }
#else
    for (std::size_t k = 0; k < kFanout; ++k) cum[k] += delta * pattern[k];
#endif
  }

  /// Adds delta to the cumulative entries lo..hi-1 of one node.
  static void range_add(double* cum, std::size_t lo, std::size_t hi, double delta) {
    const double* from = suffix_pattern(lo);
    const double* to = suffix_pattern(hi);
#if defined(__AVX512F__)
    const __m512d d = _mm512_set1_pd(delta);
    for (int block = 0; block < 2; ++block) {
      double* p = cum + 8 * block;
      const __m512d window = _mm512_sub_pd(_mm512_loadu_pd(from + 8 * block),
                                           _mm512_loadu_pd(to + 8 * block));
      _mm512_storeu_pd(p, _mm512_add_pd(_mm512_loadu_pd(p), _mm512_mul_pd(d, window)));
    }
#elif defined(__AVX2__)
    const __m256d d = _mm256_set1_pd(delta);
    for (int block = 0; block < 4; ++block) {
      double* p = cum + 4 * block;
      const __m256d window =
          _mm256_sub_pd(_mm256_loadu_pd(from + 4 * block), _mm256_loadu_pd(to + 4 * block));
      _mm256_storeu_pd(p, _mm256_add_pd(_mm256_loadu_pd(p), _mm256_mul_pd(d, window)));
    }
#else
    for (std::size_t k = 0; k < kFanout; ++k) cum[k] += delta * (from[k] - to[k]);
#endif
  }

  /// Number of the 128 cumulative entries that are <= target; the compares
  /// are independent, so the blocks pipeline.
  static std::size_t wide_count_not_above(const double* cum, double target) {
#if defined(__AVX512F__)
    const __m512d t = _mm512_set1_pd(target);
    unsigned count = 0;
    for (int block = 0; block < 16; ++block) {
      count += static_cast<unsigned>(__builtin_popcount(
          _mm512_cmp_pd_mask(_mm512_loadu_pd(cum + 8 * block), t, _CMP_LE_OQ)));
    }
    return count;
#elif defined(__AVX2__)
    const __m256d t = _mm256_set1_pd(target);
    unsigned count = 0;
    for (int block = 0; block < 32; ++block) {
      count += static_cast<unsigned>(__builtin_popcount(static_cast<unsigned>(
          _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(cum + 4 * block), t, _CMP_LE_OQ)))));
    }
    return count;
#else
    std::size_t count = 0;
    for (std::size_t j = 0; j < kWideWidth; ++j) count += cum[j] <= target ? 1 : 0;
    return count;
#endif
  }

  /// Adds delta to the cumulative entries j..127: one masked block at the
  /// boundary, plain adds beyond it.
  static void wide_suffix_add(double* cum, std::size_t j, double delta) {
    const std::size_t block = j / kFanout;
    suffix_add(cum + block * kFanout, j % kFanout, delta);
    for (std::size_t b = block + 1; b < kWideWidth / kFanout; ++b) {
      block_add(cum + b * kFanout, delta);
    }
  }

  /// Adds delta to the cumulative entries lo..hi-1 (the window a unit move
  /// between nearby sites touches).
  static void wide_range_add(double* cum, std::size_t lo, std::size_t hi, double delta) {
    const std::size_t lo_block = lo / kFanout;
    const std::size_t hi_block = hi / kFanout;
    if (lo_block == hi_block) {
      range_add(cum + lo_block * kFanout, lo % kFanout, hi % kFanout, delta);
      return;
    }
    suffix_add(cum + lo_block * kFanout, lo % kFanout, delta);
    for (std::size_t b = lo_block + 1; b < hi_block; ++b) {
      block_add(cum + b * kFanout, delta);
    }
    range_add(cum + hi_block * kFanout, 0, hi % kFanout, delta);
  }

  /// Adds delta to all 16 entries of one block.
  static void block_add(double* cum, double delta) {
#if defined(__AVX512F__)
    const __m512d d = _mm512_set1_pd(delta);
    _mm512_storeu_pd(cum, _mm512_add_pd(_mm512_loadu_pd(cum), d));
    _mm512_storeu_pd(cum + 8, _mm512_add_pd(_mm512_loadu_pd(cum + 8), d));
#elif defined(__AVX2__)
    const __m256d d = _mm256_set1_pd(delta);
    for (int block = 0; block < 4; ++block) {
      double* p = cum + 4 * block;
      _mm256_storeu_pd(p, _mm256_add_pd(_mm256_loadu_pd(p), d));
    }
#else
    for (std::size_t k = 0; k < kFanout; ++k) cum[k] += delta;
#endif
  }

  static constexpr std::size_t kMaxLevels = 8;  // 16^8 sites is far beyond use

  std::size_t size_;
  bool wide_ = false;
  std::size_t levels_ = 1;
  std::array<std::size_t, kMaxLevels> level_offset_{};
  std::vector<double> storage_;
  std::vector<double> leaves_;
};

}  // namespace particle_limits

#endif
