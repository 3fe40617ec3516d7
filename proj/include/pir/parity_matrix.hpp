#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pir::server {

// (t+1) x sqrt(n) grid of entry-sized parity blocks, stored row-major. Row 0
// holds the full candidate parities; row i holds the level-i subkey's
// contribution under each candidate chunk.
class ParityMatrix {
 public:
  ParityMatrix(std::uint32_t rows, std::uint32_t cols, std::uint32_t block_size)
      : rows_(rows), cols_(cols), block_size_(block_size),
        data_(std::size_t{rows} * cols * block_size, 0) {}

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::uint32_t block_size() const { return block_size_; }

  std::span<std::uint8_t> at(std::uint32_t row, std::uint32_t col) {
    return {data_.data() + slot(row, col), block_size_};
  }
  std::span<const std::uint8_t> at(std::uint32_t row, std::uint32_t col) const {
    return {data_.data() + slot(row, col), block_size_};
  }

  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

 private:
  std::size_t slot(std::uint32_t row, std::uint32_t col) const {
    if (row >= rows_ || col >= cols_) {
      throw std::out_of_range("parity matrix cell out of range");
    }
    return (std::size_t{row} * cols_ + col) * block_size_;
  }

  std::uint32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  std::uint32_t block_size_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace pir::server
