#include "consensus/kernels/kernels.hpp"

namespace consensus::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(CONSENSUS_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

backend& current() {
    static backend b = cpu_has_avx2() ? backend::avx2 : backend::scalar;
    return b;
}

} // namespace

backend best_supported() { return cpu_has_avx2() ? backend::avx2 : backend::scalar; }

backend active() { return current(); }

bool select(backend b) {
    if (b == backend::avx2 && !cpu_has_avx2())
        return false;
    current() = b;
    return true;
}

bool select(std::string_view n) {
    if (n == "scalar")
        return select(backend::scalar);
    if (n == "avx2")
        return select(backend::avx2);
    if (n == "auto")
        return select(best_supported());
    return false;
}

std::string_view name(backend b) { return b == backend::avx2 ? "avx2" : "scalar"; }

void neg_log(const double* u, double* out, std::size_t n) {
#if defined(CONSENSUS_AVX2_TU)
    if (active() == backend::avx2)
        return avx2::neg_log(u, out, n);
#endif
    scalar::neg_log(u, out, n);
}

void exp_nonpos(const double* x, double* out, std::size_t n) {
#if defined(CONSENSUS_AVX2_TU)
    if (active() == backend::avx2)
        return avx2::exp_nonpos(x, out, n);
#endif
    scalar::exp_nonpos(x, out, n);
}

min2 exp_draw_min2(const double* u, const double* scale, std::size_t n) {
#if defined(CONSENSUS_AVX2_TU)
    if (active() == backend::avx2)
        return avx2::exp_draw_min2(u, scale, n);
#endif
    return scalar::exp_draw_min2(u, scale, n);
}

double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x) {
#if defined(CONSENSUS_AVX2_TU)
    if (active() == backend::avx2)
        return avx2::weighted_exp_sum(w, r, n, x);
#endif
    return scalar::weighted_exp_sum(w, r, n, x);
}

} // namespace consensus::kernels
