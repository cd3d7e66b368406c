#pragma once

// Overflow-checked 2x2 integer matrix arithmetic and Smith normal form.

#include <Eigen/Core>
#include <cstdint>
#include <cstdlib>
#include <utility>

#include "reebpa/errors.hpp"

namespace reebpa {

template <class Int>
using IntMatrix2T = Eigen::Matrix<Int, 2, 2>;
template <class Int>
using IntVector2T = Eigen::Matrix<Int, 2, 1>;

using IntMatrix2 = IntMatrix2T<std::int64_t>;
using IntVector2 = IntVector2T<std::int64_t>;

template <class Int>
Int checked_add(Int a, Int b) {
  Int out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("integer overflow in addition");
  return out;
}

template <class Int>
Int checked_mul(Int a, Int b) {
  Int out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("integer overflow in product");
  return out;
}

template <class Int>
IntMatrix2T<Int> checked_product(const IntMatrix2T<Int>& a, const IntMatrix2T<Int>& b) {
  IntMatrix2T<Int> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out(i, j) = checked_add(checked_mul(a(i, 0), b(0, j)), checked_mul(a(i, 1), b(1, j)));
  return out;
}

template <class Int>
IntVector2T<Int> checked_apply(const IntMatrix2T<Int>& a, const IntVector2T<Int>& v) {
  return {checked_add(checked_mul(a(0, 0), v(0)), checked_mul(a(0, 1), v(1))),
          checked_add(checked_mul(a(1, 0), v(0)), checked_mul(a(1, 1), v(1)))};
}

template <class Int>
IntMatrix2T<Int> checked_power(const IntMatrix2T<Int>& a, int k) {
  IntMatrix2T<Int> result = IntMatrix2T<Int>::Identity();
  IntMatrix2T<Int> base = a;
  while (k > 0) {
    if (k & 1) result = checked_product(result, base);
    k >>= 1;
    if (k > 0) base = checked_product(base, base);
  }
  return result;
}

template <class Int>
Int checked_det(const IntMatrix2T<Int>& a) {
  return checked_add(checked_mul(a(0, 0), a(1, 1)), -checked_mul(a(0, 1), a(1, 0)));
}

/// Inverse of a unimodular matrix (det = +-1).
template <class Int>
IntMatrix2T<Int> unimodular_inverse(const IntMatrix2T<Int>& a) {
  const Int d = checked_det(a);
  if (d != 1 && d != -1) throw Error("matrix is not unimodular");
  IntMatrix2T<Int> inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return d == 1 ? inv : IntMatrix2T<Int>(-inv);
}

/// Euclidean remainder in [0, m).
template <class Int>
Int mod_floor(Int a, Int m) {
  Int r = a % m;
  return r < 0 ? r + m : r;
}

/// U * M * V = diag(d1, d2), U and V unimodular, 0 <= d1, d1 | d2.
template <class Int>
struct SmithForm {
  IntMatrix2T<Int> U;
  IntMatrix2T<Int> V;
  Int d1 = 0;
  Int d2 = 0;
};

template <class Int>
SmithForm<Int> smith_normal_form(const IntMatrix2T<Int>& m) {
  IntMatrix2T<Int> D = m;
  IntMatrix2T<Int> U = IntMatrix2T<Int>::Identity();
  IntMatrix2T<Int> V = IntMatrix2T<Int>::Identity();

  auto row_axpy = [](IntMatrix2T<Int>& x, int dst, int src, Int q) {  // row dst -= q * row src
    for (int j = 0; j < 2; ++j) x(dst, j) = checked_add(x(dst, j), -checked_mul(q, x(src, j)));
  };
  auto col_axpy = [](IntMatrix2T<Int>& x, int dst, int src, Int q) {
    for (int i = 0; i < 2; ++i) x(i, dst) = checked_add(x(i, dst), -checked_mul(q, x(i, src)));
  };

  for (int guard = 0; guard < 256; ++guard) {
    // Move the smallest non-zero entry to the pivot.
    int bi = -1, bj = -1;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (D(i, j) != 0 && (bi < 0 || std::abs(D(i, j)) < std::abs(D(bi, bj)))) bi = i, bj = j;
    if (bi < 0) break;
    if (bi != 0) {
      D.row(0).swap(D.row(1));
      U.row(0).swap(U.row(1));
    }
    if (bj != 0) {
      D.col(0).swap(D.col(1));
      V.col(0).swap(V.col(1));
    }
    const Int p = D(0, 0);
    const Int qr = D(1, 0) / p;
    row_axpy(D, 1, 0, qr);
    row_axpy(U, 1, 0, qr);
    const Int qc = D(0, 1) / p;
    col_axpy(D, 1, 0, qc);
    col_axpy(V, 1, 0, qc);
    if (D(1, 0) != 0 || D(0, 1) != 0) continue;
    if (D(1, 1) % p != 0) {
      // Fold row 1 into row 0 so the next pass restores divisibility.
      row_axpy(D, 0, 1, Int(-1));
      row_axpy(U, 0, 1, Int(-1));
      continue;
    }
    break;
  }
  if (D(1, 0) != 0 || D(0, 1) != 0) throw Error("smith normal form did not converge");
  if (D(0, 0) < 0) {
    D.row(0) = -D.row(0);
    U.row(0) = -U.row(0);
  }
  if (D(1, 1) < 0) {
    D.row(1) = -D.row(1);
    U.row(1) = -U.row(1);
  }
  if (D(0, 0) == 0 && D(1, 1) != 0) {
    D.row(0).swap(D.row(1));
    U.row(0).swap(U.row(1));
    D.col(0).swap(D.col(1));
    V.col(0).swap(V.col(1));
  }
  return {U, V, D(0, 0), D(1, 1)};
}

}  // namespace reebpa
