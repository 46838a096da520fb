// lcsctc/matrix.h
//
// Small dense row-major grid used for cost matrices, emissions, masks and
// gradients. Rows index phonemes (or vocabulary entries), columns index
// frames.

#ifndef LCSCTC_MATRIX_H_
#define LCSCTC_MATRIX_H_

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lcsctc {

template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T &operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const T &operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<T> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  std::span<const T> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_,
            static_cast<std::size_t>(cols_)};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Grid &, const Grid &) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Matrix = Grid<double>;
using BitMatrix = Grid<std::uint8_t>;

}  // namespace lcsctc

#endif  // LCSCTC_MATRIX_H_
