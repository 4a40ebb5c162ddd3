#include <cstdlib>
#include <string_view>

#include "robin/kernels.hpp"

namespace robin::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum)(std::span<const double>);
  double (*max_abs)(std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*xpay)(std::span<const double>, double, std::span<double>);
  void (*multiply)(std::span<const double>, std::span<const double>, std::span<double>);
  void (*csr_matvec)(const CsrView&, std::span<const double>, std::span<double>);
};

constexpr Table kScalar{Isa::Scalar,    scalar::dot,      scalar::sum,       scalar::max_abs,
                        scalar::axpy,   scalar::xpay,     scalar::multiply,  scalar::csr_matvec};
#if defined(ROBIN_HAVE_AVX2)
constexpr Table kAvx2{Isa::Avx2,  avx2::dot,  avx2::sum,      avx2::max_abs,
                      avx2::axpy, avx2::xpay, avx2::multiply, avx2::csr_matvec};
#endif

const Table& table_for(Isa isa) {
#if defined(ROBIN_HAVE_AVX2)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const Table* initial_table() {
  Isa want = isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  if (const char* env = std::getenv("ROBIN_LAB_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") want = Isa::Scalar;
    if (v == "avx2") want = Isa::Avx2;
  }
  return &table_for(want);
}

const Table*& current() {
  static const Table* t = initial_table();
  return t;
}

}  // namespace

const char* to_string(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept {
  if (isa == Isa::Scalar) return true;
#if defined(ROBIN_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current()->isa; }

void select_isa(Isa isa) noexcept { current() = &table_for(isa); }

double dot(std::span<const double> x, std::span<const double> y) { return current()->dot(x, y); }
double sum(std::span<const double> x) { return current()->sum(x); }
double max_abs(std::span<const double> x) { return current()->max_abs(x); }
void axpy(double a, std::span<const double> x, std::span<double> y) { current()->axpy(a, x, y); }
void xpay(std::span<const double> x, double a, std::span<double> y) { current()->xpay(x, a, y); }
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  current()->multiply(a, b, out);
}
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y) { current()->csr_matvec(a, x, y); }

}  // namespace robin::kernels
