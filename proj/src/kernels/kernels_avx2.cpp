// AVX2+FMA variants. Built with -mavx2 -mfma in this translation unit only;
// avx2_ops() still checks the running CPU before handing them out.
#include "qkdlab/kernels.hpp"

#include <immintrin.h>

namespace qkd::kernels {
namespace {

inline __m256d cospi01(__m256d x) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d flip = _mm256_cmp_pd(x, half, _CMP_GT_OQ);
    const __m256d t = _mm256_blendv_pd(x, _mm256_sub_pd(one, x), flip);
    const __m256d u = _mm256_mul_pd(t, t);
    __m256d r = _mm256_set1_pd(kCosPiCoeff[11]);
    for (int k = 10; k >= 0; --k) r = _mm256_fmadd_pd(r, u, _mm256_set1_pd(kCosPiCoeff[k]));
    const __m256d sign = _mm256_and_pd(flip, _mm256_set1_pd(-0.0));
    return _mm256_xor_pd(r, sign);
}

void efficiency_avx2(const CurveParams& p, const double* t, double* out, std::size_t n) {
    const __m256d ws = _mm256_set1_pd(p.window_start);
    const __m256d rise = _mm256_set1_pd(p.rise);
    const __m256d rp = _mm256_set1_pd(p.rise_plateau);
    const __m256d wlen = _mm256_set1_pd(p.window_len);
    const __m256d fall = _mm256_set1_pd(p.fall);
    const __m256d peak = _mm256_set1_pd(p.peak);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d tv = _mm256_loadu_pd(t + i);
        const __m256d local = _mm256_sub_pd(tv, ws);
        const __m256d m_in = _mm256_and_pd(_mm256_cmp_pd(local, zero, _CMP_GT_OQ),
                                           _mm256_cmp_pd(local, wlen, _CMP_LT_OQ));
        const __m256d m_rise = _mm256_cmp_pd(local, rise, _CMP_LT_OQ);
        const __m256d m_le_rp = _mm256_cmp_pd(local, rp, _CMP_LE_OQ);
        const __m256d xr = _mm256_div_pd(local, rise);
        const __m256d xf = _mm256_sub_pd(one, _mm256_div_pd(_mm256_sub_pd(local, rp), fall));
        const __m256d x = _mm256_blendv_pd(xf, xr, m_rise);
        const __m256d e = _mm256_fnmadd_pd(half, cospi01(x), half);
        __m256d v = _mm256_mul_pd(peak, e);
        v = _mm256_blendv_pd(v, peak, _mm256_andnot_pd(m_rise, m_le_rp));
        v = _mm256_and_pd(v, m_in);
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) out[i] = efficiency_at(p, t[i]);
}

void sum_sumsq_avx2(const double* x, std::size_t n, double* sum, double* sumsq) {
    __m256d s = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        s = _mm256_add_pd(s, v);
        q = _mm256_fmadd_pd(v, v, q);
    }
    alignas(32) double sl[4], ql[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(ql, q);
    double rs = sl[0] + sl[1] + sl[2] + sl[3];
    double rq = ql[0] + ql[1] + ql[2] + ql[3];
    for (; i < n; ++i) {
        rs += x[i];
        rq += x[i] * x[i];
    }
    *sum = rs;
    *sumsq = rq;
}

std::size_t count_below_avx2(const double* x, std::size_t n, double threshold) {
    const __m256d thr = _mm256_set1_pd(threshold);
    std::size_t c = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_LT_OQ));
        c += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
    }
    for (; i < n; ++i) c += x[i] < threshold ? 1 : 0;
    return c;
}

void round_multiple_avx2(const double* in, double* out, std::size_t n, double resolution) {
    if (resolution <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i];
        return;
    }
    const __m256d res = _mm256_set1_pd(resolution);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(in + i);
        const __m256d k =
            _mm256_round_pd(_mm256_div_pd(v, res), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(res, k));
    }
    for (; i < n; ++i) out[i] = resolution * std::nearbyint(in[i] / resolution);
}

} // namespace

const Ops* avx2_ops() {
    static const Ops ops{"avx2", efficiency_avx2, sum_sumsq_avx2, count_below_avx2,
                         round_multiple_avx2};
    static const bool usable = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return usable ? &ops : nullptr;
}

} // namespace qkd::kernels
