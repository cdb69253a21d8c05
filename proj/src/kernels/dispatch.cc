#include <atomic>
#include <cstdlib>
#include <string>

#include "mner/kernels.h"

namespace mner::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(MNER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
#if defined(MNER_HAVE_AVX2)
      if (cpu_has_avx2()) return &avx2_table();
#endif
      return nullptr;
    case Backend::kNeon:
#if defined(MNER_HAVE_NEON)
      return &neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("MNER_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && table_for(Backend::kAvx2)) return table_for(Backend::kAvx2);
    if (want == "neon" && table_for(Backend::kNeon)) return table_for(Backend::kNeon);
  }
  if (const KernelTable* t = table_for(Backend::kAvx2)) return t;
  if (const KernelTable* t = table_for(Backend::kNeon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool available(Backend b) { return table_for(b) != nullptr; }

bool select(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) return false;
  current().store(t, std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

}  // namespace mner::kernels
