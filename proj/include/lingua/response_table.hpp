#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lingua {

// Ragged (question, option) layout shared by every per-response matrix.
// Cells are stored flat; dim() is the total option count across questions.
class ResponseShape {
 public:
  ResponseShape() = default;
  explicit ResponseShape(const std::vector<std::size_t>& option_counts) {
    offsets_.reserve(option_counts.size() + 1);
    offsets_.push_back(0);
    for (std::size_t n : option_counts) offsets_.push_back(offsets_.back() + n);
  }

  std::size_t questions() const noexcept {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t options(std::size_t q) const { return offsets_[q + 1] - offsets_[q]; }
  std::size_t offset(std::size_t q) const { return offsets_[q]; }
  std::size_t dim() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }

  bool operator==(const ResponseShape&) const = default;

 private:
  std::vector<std::size_t> offsets_;
};

template <typename T>
class ResponseTable {
 public:
  ResponseTable() = default;
  explicit ResponseTable(ResponseShape shape, T fill = T{})
      : shape_(std::move(shape)), cells_(shape_.dim(), fill) {}

  const ResponseShape& shape() const noexcept { return shape_; }
  std::size_t questions() const noexcept { return shape_.questions(); }

  T& operator()(std::size_t q, std::size_t r) { return cells_[shape_.offset(q) + r]; }
  const T& operator()(std::size_t q, std::size_t r) const {
    return cells_[shape_.offset(q) + r];
  }

  std::span<T> row(std::size_t q) {
    return {cells_.data() + shape_.offset(q), shape_.options(q)};
  }
  std::span<const T> row(std::size_t q) const {
    return {cells_.data() + shape_.offset(q), shape_.options(q)};
  }

  std::span<T> cells() noexcept { return cells_; }
  std::span<const T> cells() const noexcept { return cells_; }

  template <typename U>
  ResponseTable<U> cast() const {
    ResponseTable<U> out(shape_);
    for (std::size_t i = 0; i < cells_.size(); ++i) out.cells()[i] = static_cast<U>(cells_[i]);
    return out;
  }

  bool operator==(const ResponseTable&) const = default;

 private:
  ResponseShape shape_;
  std::vector<T> cells_;
};

using CountTable = ResponseTable<std::int64_t>;
using RealTable = ResponseTable<double>;

}  // namespace lingua
