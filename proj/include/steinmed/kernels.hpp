#pragma once

// Dense double-precision inner loops used by the factorizations and the
// moment accumulators. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant. The active table is picked once at startup
// from cpuid; STEINMED_KERNELS=scalar in the environment forces the
// reference path.

#include <cstddef>
#include <string_view>

namespace steinmed::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // z[i] = x[i] * y[i]
  void (*multiply)(const double* x, const double* y, double* z, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_table() noexcept;

const KernelTable& active() noexcept;

// Overrides the dispatch choice. Returns false (and leaves the table
// unchanged) when the requested ISA is unavailable. Not synchronized with
// concurrent kernel calls; switch before starting worker threads.
bool set_active(Isa isa) noexcept;

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void scale(double a, double* x, std::size_t n) { active().scale(a, x, n); }
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline void multiply(const double* x, const double* y, double* z, std::size_t n) {
  active().multiply(x, y, z, n);
}

namespace detail {
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scale_scalar(double a, double* x, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
void multiply_scalar(const double* x, const double* y, double* z, std::size_t n);

#if defined(STEINMED_HAVE_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scale_avx2(double a, double* x, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
void multiply_avx2(const double* x, const double* y, double* z, std::size_t n);
#endif
}  // namespace detail

}  // namespace steinmed::kernels
