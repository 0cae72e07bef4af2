#include "yamabe/intmatrix.hpp"

#include "yamabe/errors.hpp"

namespace yamabe {

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<Integer>>& rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows.front().size();
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw ShapeError("ragged matrix rows");
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& other) const {
  if (cols_ != other.rows_) throw ShapeError("matrix product dimension mismatch");
  IntMatrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const Integer& a = at(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) {
        out.at(i, j) += a * other.at(k, j);
      }
    }
  }
  return out;
}

std::vector<Rational> IntMatrix::apply(const std::vector<Rational>& v) const {
  if (v.size() != cols_) throw ShapeError("matrix-vector dimension mismatch");
  std::vector<Rational> out(rows_, Rational(0));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at(i, j) != 0) out[i] += Rational(at(i, j)) * v[j];
    }
  }
  return out;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
  }
  return out;
}

Integer IntMatrix::determinant() const {
  if (!is_square()) throw ShapeError("determinant of a non-square matrix");
  std::size_t n = rows_;
  if (n == 0) return 1;
  IntMatrix work = *this;
  Integer prev_pivot = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && work.at(pivot, k) == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(work.at(k, j), work.at(pivot, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        work.at(i, j) =
            (work.at(i, j) * work.at(k, k) - work.at(i, k) * work.at(k, j)) / prev_pivot;
      }
      work.at(i, k) = 0;
    }
    prev_pivot = work.at(k, k);
  }
  Integer det = work.at(n - 1, n - 1);
  return sign > 0 ? det : Integer(-det);
}

IntMatrix IntMatrix::inverse_unimodular() const {
  if (!is_square()) throw ShapeError("inverse of a non-square matrix");
  Integer det = determinant();
  if (det != 1 && det != -1) {
    throw InputError("matrix is not unimodular (determinant " + det.str() + ")");
  }
  std::size_t n = rows_;
  // Gauss-Jordan over the rationals; the result is integral by Cramer.
  std::vector<std::vector<Rational>> work(n, std::vector<Rational>(2 * n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) work[i][j] = Rational(at(i, j));
    work[i][n + i] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && work[pivot][k] == 0) ++pivot;
    if (pivot == n) throw InternalError("unimodular matrix with singular elimination");
    std::swap(work[k], work[pivot]);
    Rational inv = Rational(1) / work[k][k];
    for (std::size_t j = 0; j < 2 * n; ++j) work[k][j] *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || work[i][k] == 0) continue;
      Rational factor = work[i][k];
      for (std::size_t j = 0; j < 2 * n; ++j) work[i][j] -= factor * work[k][j];
    }
  }
  IntMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Rational& v = work[i][n + j];
      if (!is_integer(v)) throw InternalError("unimodular inverse produced a non-integer entry");
      out.at(i, j) = numerator(v);
    }
  }
  return out;
}

}  // namespace yamabe
