#include "gdyn/core/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gdyn {

namespace detail {
#if defined(__x86_64__) || defined(_M_X64)
const KernelOps& avx2_kernels();
#endif
} // namespace detail

namespace {

const KernelOps& resolve()
{
    const char* force = std::getenv("GARMENTDYN_SIMD");
    if (force && std::strcmp(force, "scalar") == 0) return scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
    const bool want_avx2 = !force || std::strcmp(force, "avx2") == 0;
    if (want_avx2 && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return detail::avx2_kernels();
#endif
    return scalar_kernels();
}

} // namespace

const KernelOps& kernels()
{
    static const KernelOps& ops = resolve();
    return ops;
}

} // namespace gdyn
