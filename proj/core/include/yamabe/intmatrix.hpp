#pragma once

#include <cstddef>
#include <vector>

#include "yamabe/rational.hpp"

namespace yamabe {

/// Dense integer matrix with arbitrary-precision entries.
class IntMatrix {
public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(const std::vector<std::vector<Integer>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Integer& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Integer& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool operator==(const IntMatrix& other) const = default;

  IntMatrix operator*(const IntMatrix& other) const;
  std::vector<Rational> apply(const std::vector<Rational>& v) const;
  IntMatrix transpose() const;

  Integer determinant() const;  // fraction-free elimination; throws ShapeError unless square

  /// Inverse of a matrix with determinant +-1; throws InputError otherwise.
  IntMatrix inverse_unimodular() const;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Integer> data_;
};

}  // namespace yamabe
