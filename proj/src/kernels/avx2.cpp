// AVX2 variants of the batch math kernels. Compiled with -mavx2 -mfma in its
// own TU; callers reach these only after the cpuid probe in dispatch.cpp.

#include "consensus/kernels/kernels.hpp"

#if defined(CONSENSUS_AVX2_TU)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace consensus::kernels::avx2 {
namespace {

// ln2 split with 21 trailing zero bits in the high part, so k*LN2_HI is exact
// for every exponent k that can appear in a finite double.
constexpr double LN2_HI = 6.93147180369123816490e-01;
constexpr double LN2_LO = 1.90821492927058770002e-10;
constexpr double INV_LN2 = 1.44269504088896338700e+00;
constexpr double SQRT2 = 1.41421356237309514547;

// log(m) = 2*atanh(r), r = (m-1)/(m+1), m in [1/sqrt2, sqrt2).
// Odd series in r, expressed as 2r * (1 + z*P(z)), z = r^2.
inline __m256d log_mantissa(__m256d m) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d r = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d z = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.0 / 15.0);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 3.0));
    const __m256d t = _mm256_add_pd(r, r);
    return _mm256_fmadd_pd(_mm256_mul_pd(t, z), p, t);
}

// log(x) for positive normal x.
inline __m256d vlog(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    // biased exponent of each lane, as doubles
    const __m256i e64 = _mm256_srli_epi64(bits, 52);
    const __m256i pack_idx = _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
    const __m128i e32 = _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(e64, pack_idx));
    __m256d k = _mm256_sub_pd(_mm256_cvtepi32_pd(e32), _mm256_set1_pd(1023.0));
    // mantissa in [1,2)
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000ll);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
    // renormalize to [1/sqrt2, sqrt2)
    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(SQRT2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    k = _mm256_add_pd(k, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    const __m256d lm = log_mantissa(m);
    const __m256d hi = _mm256_fmadd_pd(k, _mm256_set1_pd(LN2_HI), lm);
    return _mm256_fmadd_pd(k, _mm256_set1_pd(LN2_LO), hi);
}

// exp(x) for x in [-708, 0].
inline __m256d vexp(__m256d x) {
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(INV_LN2)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fmadd_pd(n, _mm256_set1_pd(-LN2_HI), x);
    r = _mm256_fmadd_pd(n, _mm256_set1_pd(-LN2_LO), r);
    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    // 2^n via exponent bits; n >= -1022 here so the result stays normal
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i ebits =
        _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(ebits));
}

} // namespace

void neg_log(const double* u, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = vlog(_mm256_loadu_pd(u + i));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(zero, v));
    }
    for (; i < n; ++i)
        out[i] = -std::log(u[i]);
}

void exp_nonpos(const double* x, double* out, std::size_t n) {
    const __m256d floor_x = _mm256_set1_pd(-708.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d under = _mm256_cmp_pd(v, floor_x, _CMP_LT_OQ);
        const __m256d e = vexp(_mm256_max_pd(v, floor_x));
        _mm256_storeu_pd(out + i, _mm256_andnot_pd(under, e));
    }
    for (; i < n; ++i)
        out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

min2 exp_draw_min2(const double* u, const double* scale, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    __m256d m1 = _mm256_set1_pd(inf);
    __m256d m2 = _mm256_set1_pd(inf);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d draws = _mm256_mul_pd(
            _mm256_sub_pd(zero, vlog(_mm256_loadu_pd(u + i))), _mm256_loadu_pd(scale + i));
        m2 = _mm256_min_pd(m2, _mm256_max_pd(m1, draws));
        m1 = _mm256_min_pd(m1, draws);
    }
    double cand[10];
    _mm256_storeu_pd(cand, m1);
    _mm256_storeu_pd(cand + 4, m2);
    double s1 = inf, s2 = inf;
    for (; i < n; ++i) {
        const double x = -std::log(u[i]) * scale[i];
        if (x < s1) {
            s2 = s1;
            s1 = x;
        } else if (x < s2) {
            s2 = x;
        }
    }
    cand[8] = s1;
    cand[9] = s2;
    std::partial_sort(cand, cand + 2, cand + 10);
    return {cand[0], cand[1]};
}

double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x) {
    const __m256d vx = _mm256_set1_pd(-x);
    const __m256d floor_x = _mm256_set1_pd(-708.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d e_arg = _mm256_mul_pd(_mm256_loadu_pd(r + i), vx);
        const __m256d under = _mm256_cmp_pd(e_arg, floor_x, _CMP_LT_OQ);
        const __m256d e = _mm256_andnot_pd(under, vexp(_mm256_max_pd(e_arg, floor_x)));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), e, acc);
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) {
        const double e = -r[i] * x;
        total += w[i] * (e < -708.0 ? 0.0 : std::exp(e));
    }
    return total;
}

} // namespace consensus::kernels::avx2

#endif // CONSENSUS_AVX2_TU
