#include "robin/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "robin/error.hpp"

namespace robin {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<Triplet> triplets) {
  for (std::size_t i = 0; i < n; ++i) triplets.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), 0.0});
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  row_ptr_.assign(n + 1, 0);
  diag_.assign(n, -1);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n) {
      throw Error(ErrorKind::InvalidParameter, "sparse entry out of range");
    }
    if (!col_.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      val_.back() += t.value;
      continue;
    }
    if (t.row == t.col) diag_[t.row] = static_cast<std::int32_t>(col_.size());
    col_.push_back(t.col);
    val_.push_back(t.value);
    ++row_ptr_[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
  const auto begin = col_.begin() + row_ptr_[row];
  const auto end = col_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(begin, end, static_cast<std::int32_t>(col));
  return (it != end && *it == static_cast<std::int32_t>(col)) ? val_[it - col_.begin()] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = val_[diag_[i]];
  return d;
}

void CsrMatrix::add_to_diagonal(std::span<const double> d) {
  for (std::size_t i = 0; i < d.size(); ++i) val_[diag_[i]] += d[i];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  kernels::csr_matvec(view(), x, y);
}

double CsrMatrix::norm_inf() const {
  double m = 0.0;
  for (std::size_t r = 0; r < size(); ++r) {
    double s = 0.0;
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(val_[k]);
    m = std::max(m, s);
  }
  return m;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t r = 0; r < size(); ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      scale = std::max(scale, std::abs(val_[k]));
      worst = std::max(worst, std::abs(val_[k] - at(col_[k], r)));
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const {
  std::vector<std::vector<double>> d(size(), std::vector<double>(size(), 0.0));
  for (std::size_t r = 0; r < size(); ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d[r][col_[k]] = val_[k];
  }
  return d;
}

std::string CsrMatrix::to_coordinate_text() const {
  std::string out;
  char buf[80];
  for (std::size_t r = 0; r < size(); ++r) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%zu %d %.17g\n", r, col_[k], val_[k]);
      out += buf;
    }
  }
  return out;
}

CsrMatrix CsrMatrix::combine(const CsrMatrix& a, double s, const CsrMatrix& b) {
  if (a.row_ptr_ != b.row_ptr_ || a.col_ != b.col_) {
    throw Error(ErrorKind::InvalidParameter, "combine requires identical sparsity patterns");
  }
  CsrMatrix c = a;
  for (std::size_t k = 0; k < c.val_.size(); ++k) c.val_[k] += s * b.val_[k];
  return c;
}

CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                            const CgOptions& options) {
  const std::size_t n = a.size();
  const int max_it = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

  CgResult result;
  const double b_norm = std::sqrt(kernels::dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  double r_norm = std::sqrt(kernels::dot(r, r));
  result.relative_residual = r_norm / b_norm;
  if (result.relative_residual <= options.relative_tolerance) {
    result.converged = true;
    return result;
  }

  kernels::multiply(inv_diag, r, z);
  p = z;
  double rz = kernels::dot(r, z);
  for (int it = 1; it <= max_it; ++it) {
    a.multiply(p, ap);
    const double pap = kernels::dot(p, ap);
    if (!(std::abs(pap) > 0.0) || !std::isfinite(pap)) break;
    const double alpha = rz / pap;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, ap, r);
    r_norm = std::sqrt(kernels::dot(r, r));
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    if (result.relative_residual <= options.relative_tolerance) {
      result.converged = true;
      break;
    }
    kernels::multiply(inv_diag, r, z);
    const double rz_new = kernels::dot(r, z);
    kernels::xpay(z, rz_new / rz, p);
    rz = rz_new;
  }
  return result;
}

std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (a[piv][k] == 0.0) throw Error(ErrorKind::InvalidParameter, "singular matrix in dense_solve");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace robin
