/*
 * Copyright 2026 The sliceaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sliceaudit {

/// Fixed-width bitset over row indices [0, size()).
///
/// Bits past size() in the last word are always zero, so popcounts and
/// intersections never need masking.
class RowBitset {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  RowBitset() = default;
  explicit RowBitset(std::size_t n_rows) : size_(n_rows), words_(word_count(n_rows), 0) {}

  static constexpr std::size_t word_count(std::size_t n_rows) {
    return (n_rows + kWordBits - 1) / kWordBits;
  }

  std::size_t size() const { return size_; }
  std::span<const word_type> words() const { return words_; }

  void set(std::size_t row) {
    assert(row < size_);
    words_[row / kWordBits] |= word_type{1} << (row % kWordBits);
  }

  bool test(std::size_t row) const {
    assert(row < size_);
    return (words_[row / kWordBits] >> (row % kWordBits)) & 1u;
  }

  std::size_t count() const {
    std::size_t total = 0;
    for (word_type w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](word_type w) { return w == 0; });
  }

  RowBitset& operator&=(const RowBitset& other) {
    assert(size_ == other.size_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  RowBitset& operator|=(const RowBitset& other) {
    assert(size_ == other.size_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  friend RowBitset operator&(RowBitset lhs, const RowBitset& rhs) { return lhs &= rhs; }
  friend RowBitset operator|(RowBitset lhs, const RowBitset& rhs) { return lhs |= rhs; }

  friend bool operator==(const RowBitset&, const RowBitset&) = default;

  /// Calls fn(row) for every set bit in increasing row order.
  template <typename Fn>
  void for_each_set(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      word_type w = words_[wi];
      while (w != 0) {
        const int bit = std::countr_zero(w);
        fn(wi * kWordBits + static_cast<std::size_t>(bit));
        w &= w - 1;
      }
    }
  }

  /// Calls fn(row) for every clear bit in increasing row order.
  template <typename Fn>
  void for_each_clear(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      word_type w = ~words_[wi] & tail_mask(wi);
      while (w != 0) {
        const int bit = std::countr_zero(w);
        fn(wi * kWordBits + static_cast<std::size_t>(bit));
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> to_rows() const {
    std::vector<std::size_t> rows;
    rows.reserve(count());
    for_each_set([&](std::size_t r) { rows.push_back(r); });
    return rows;
  }

 private:
  word_type tail_mask(std::size_t word_index) const {
    const std::size_t rem = size_ % kWordBits;
    if (rem == 0 || word_index + 1 != words_.size()) return ~word_type{0};
    return (word_type{1} << rem) - 1;
  }

  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

/// popcount(a & b) without materializing the intersection.
inline std::size_t intersect_count(const RowBitset& a, const RowBitset& b) {
  assert(a.size() == b.size());
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) total += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  return total;
}

}  // namespace sliceaudit
