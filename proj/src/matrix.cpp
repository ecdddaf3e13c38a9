#include "infostab/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "infostab/error.hpp"

namespace infostab {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw ContractError("DenseMatrix: shape mismatch in +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

std::vector<double> DenseMatrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (double v : row(r)) out[r] += v;
  return out;
}

std::vector<double> DenseMatrix::left_multiply(std::span<const double> x) const {
  if (x.size() != rows_) throw ContractError("DenseMatrix: left_multiply size mismatch");
  std::vector<double> out(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const auto rr = row(r);
    for (std::size_t c = 0; c < cols_; ++c) out[c] += xr * rr[c];
  }
  return out;
}

std::vector<double> DenseMatrix::right_multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw ContractError("DenseMatrix: right_multiply size mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto rr = row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += rr[c] * x[c];
    out[r] = acc;
  }
  return out;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
  a += b;
  return a;
}

DenseMatrix operator*(double s, DenseMatrix a) {
  a *= s;
  return a;
}

DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractError("DenseMatrix: shape mismatch in max_abs_diff");
  double worst = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) worst = std::max(worst, std::abs(da[k] - db[k]));
  return worst;
}

}  // namespace infostab
