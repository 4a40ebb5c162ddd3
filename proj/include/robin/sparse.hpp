#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "robin/kernels.hpp"

namespace robin {

struct Triplet {
  std::int32_t row;
  std::int32_t col;
  double value;
};

/// Square sparse matrix in compressed row form with sorted, unique columns.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Duplicate (row, col) entries are summed. Every row gets an explicit
  /// diagonal slot, possibly zero.
  CsrMatrix(std::size_t n, std::vector<Triplet> triplets);

  std::size_t size() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return val_.size(); }
  kernels::CsrView view() const { return {row_ptr_, col_, val_}; }

  std::span<const std::int32_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return col_; }
  std::span<const double> values() const { return val_; }

  double at(std::size_t row, std::size_t col) const;
  std::vector<double> diagonal() const;
  void add_to_diagonal(std::span<const double> d);

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  double norm_inf() const;
  /// Max |A_ij - A_ji| / max|A_ij|.
  double asymmetry() const;

  std::vector<std::vector<double>> to_dense() const;
  /// Coordinate list, one `i j value` line per stored entry.
  std::string to_coordinate_text() const;

  /// A + s*B for matrices with identical sparsity.
  static CsrMatrix combine(const CsrMatrix& a, double s, const CsrMatrix& b);

 private:
  std::vector<std::int32_t> row_ptr_;
  std::vector<std::int32_t> col_;
  std::vector<double> val_;
  std::vector<std::int32_t> diag_;
};

struct CgOptions {
  double relative_tolerance = 1e-12;
  int max_iterations = 0;  // 0 selects 10 * n
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradients with a diagonal (Jacobi) preconditioner. `x` holds
/// the initial guess on entry.
CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                            const CgOptions& options = {});

/// Dense LU solve with partial pivoting; intended for n <= 500.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b);

}  // namespace robin
