#pragma once

// Vector kernels used by the Krylov solvers and residual evaluations.
//
// Each kernel has a portable scalar reference in robin::kernels::scalar and,
// on x86-64 builds, an AVX2+FMA variant in robin::kernels::avx2. The
// unqualified entry points dispatch to the best variant the running CPU
// supports; the choice is made once and can be pinned with the environment
// variable ROBIN_LAB_SIMD=scalar|avx2.
//
// Reductions (dot, sum) reassociate in the vector variants, so results agree
// with the scalar reference to a few ulps of the summed magnitudes rather than
// bit-exactly. Elementwise kernels agree bit-exactly except where FMA
// contraction changes one rounding.

#include <cstddef>
#include <cstdint>
#include <span>

namespace robin::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa) noexcept;

/// Whether the running CPU and this build support the given variant.
bool isa_available(Isa isa) noexcept;

/// Variant used by the dispatching entry points.
Isa active_isa() noexcept;

/// Pins the dispatch target. Not thread-safe; call before any solve.
/// Requests for an unavailable variant fall back to scalar.
void select_isa(Isa isa) noexcept;

/// Read-only view of a compressed-row matrix.
struct CsrView {
  std::span<const std::int32_t> row_ptr;
  std::span<const std::int32_t> col;
  std::span<const double> val;
};

double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double max_abs(std::span<const double> x);
/// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = x + a*y
void xpay(std::span<const double> x, double a, std::span<double> y);
/// out = a .* b
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
/// y = A x
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double max_abs(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double a, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace scalar

#if defined(ROBIN_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
double sum(std::span<const double> x);
double max_abs(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double a, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

}  // namespace robin::kernels
