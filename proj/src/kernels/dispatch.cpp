#include <atomic>
#include <cstdlib>
#include <string_view>

#include "steinmed/kernels.hpp"

namespace steinmed::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar,        "scalar",           detail::dot_scalar,
                              detail::axpy_scalar, detail::scale_scalar, detail::sum_scalar,
                              detail::multiply_scalar};

#if defined(STEINMED_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2,          "avx2",           detail::dot_avx2,
                            detail::axpy_avx2,  detail::scale_avx2, detail::sum_avx2,
                            detail::multiply_avx2};

bool cpu_has_avx2() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable* pick_default() noexcept {
  if (const char* env = std::getenv("STEINMED_KERNELS"); env && std::string_view(env) == "scalar") {
    return &kScalar;
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(STEINMED_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

bool set_active(Isa isa) noexcept {
  const KernelTable* t = isa == Isa::Scalar ? &kScalar : avx2_table();
  if (!t) return false;
  slot().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace steinmed::kernels
