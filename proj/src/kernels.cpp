#include "farfield/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define FARFIELD_X86 1
#endif

namespace farfield {

namespace {

inline void summand(const CellRow& r, size_t k, double x1, double x2, double& re, double& im) {
    double wr = 1.0 - r.m11[k] * r.m22[k] + r.m12[k] * r.m21[k];
    double wi = r.m11[k] + r.m22[k];
    double e = std::exp(x1 * r.eta1[k] + x2 * r.eta2[k]);
    double ar = r.f_re[k] * wr - r.f_im[k] * wi;
    double ai = r.f_re[k] * wi + r.f_im[k] * wr;
    ar *= e;
    ai *= e;
    re = ar * r.ph_re[k] - ai * r.ph_im[k];
    im = ar * r.ph_im[k] + ai * r.ph_re[k];
}

// Pairwise sum over [lo, hi).
void pairwise(const CellRow& r, size_t lo, size_t hi, double x1, double x2, double& re, double& im) {
    if (hi - lo <= 8) {
        re = im = 0.0;
        for (size_t k = lo; k < hi; ++k) {
            double a, b;
            summand(r, k, x1, x2, a, b);
            re += a;
            im += b;
        }
        return;
    }
    size_t mid = lo + (hi - lo) / 2;
    double r0, i0, r1, i1;
    pairwise(r, lo, mid, x1, x2, r0, i0);
    pairwise(r, mid, hi, x1, x2, r1, i1);
    re = r0 + r1;
    im = i0 + i1;
}

}  // namespace

cplx row_sum_scalar(const CellRow& row, double x1, double x2) {
    if (row.n == 0) return 0.0;
    double re, im;
    pairwise(row, 0, row.n, x1, x2, re, im);
    return {re, im};
}

#ifdef FARFIELD_X86

#pragma GCC diagnostic ignored "-Wpsabi"

namespace {

__attribute__((target("avx2,fma"))) inline __m256d pow2(__m128i k) {
    __m256i k64 = _mm256_cvtepi32_epi64(k);
    k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
}

// exp for 4 doubles: x = n ln2 + r, |r| <= ln2/2, degree-12 Taylor on r.
__attribute__((target("avx2,fma"))) inline __m256d exp4(__m256d x) {
    const __m256d lo = _mm256_set1_pd(-708.0), hi = _mm256_set1_pd(709.0);
    x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
    const __m256d ln2hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2lo = _mm256_set1_pd(1.42860682030941723212e-6);
    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2hi, x);
    r = _mm256_fnmadd_pd(n, ln2lo, r);
    static const double c[] = {1.0 / 479001600, 1.0 / 39916800, 1.0 / 3628800, 1.0 / 362880, 1.0 / 40320,
                               1.0 / 5040,      1.0 / 720,      1.0 / 120,     1.0 / 24,     1.0 / 6,
                               0.5,             1.0,            1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int k = 1; k < 13; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));
    // scale by 2^n through the exponent bits, split in two steps to stay in range
    __m128i ni = _mm256_cvtpd_epi32(n);
    __m128i n1 = _mm_srai_epi32(ni, 1);
    __m128i n2 = _mm_sub_epi32(ni, n1);
    return _mm256_mul_pd(_mm256_mul_pd(p, pow2(n1)), pow2(n2));
}

}  // namespace

__attribute__((target("avx2,fma"))) cplx row_sum_avx2(const CellRow& r, double x1, double x2) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d vx1 = _mm256_set1_pd(x1), vx2 = _mm256_set1_pd(x2);
    __m256d acc_re = _mm256_setzero_pd(), acc_im = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= r.n; k += 4) {
        __m256d m11 = _mm256_loadu_pd(r.m11 + k), m12 = _mm256_loadu_pd(r.m12 + k);
        __m256d m21 = _mm256_loadu_pd(r.m21 + k), m22 = _mm256_loadu_pd(r.m22 + k);
        __m256d wr = _mm256_add_pd(_mm256_fnmadd_pd(m11, m22, one), _mm256_mul_pd(m12, m21));
        __m256d wi = _mm256_add_pd(m11, m22);
        __m256d e = exp4(_mm256_fmadd_pd(vx1, _mm256_loadu_pd(r.eta1 + k), _mm256_mul_pd(vx2, _mm256_loadu_pd(r.eta2 + k))));
        __m256d fr = _mm256_loadu_pd(r.f_re + k), fi = _mm256_loadu_pd(r.f_im + k);
        __m256d ar = _mm256_mul_pd(_mm256_fmsub_pd(fr, wr, _mm256_mul_pd(fi, wi)), e);
        __m256d ai = _mm256_mul_pd(_mm256_fmadd_pd(fr, wi, _mm256_mul_pd(fi, wr)), e);
        __m256d pr = _mm256_loadu_pd(r.ph_re + k), pi = _mm256_loadu_pd(r.ph_im + k);
        acc_re = _mm256_add_pd(acc_re, _mm256_fmsub_pd(ar, pr, _mm256_mul_pd(ai, pi)));
        acc_im = _mm256_add_pd(acc_im, _mm256_fmadd_pd(ar, pi, _mm256_mul_pd(ai, pr)));
    }
    alignas(32) double bre[4], bim[4];
    _mm256_store_pd(bre, acc_re);
    _mm256_store_pd(bim, acc_im);
    double re = (bre[0] + bre[1]) + (bre[2] + bre[3]);
    double im = (bim[0] + bim[1]) + (bim[2] + bim[3]);
    for (; k < r.n; ++k) {
        double a, b;
        summand(r, k, x1, x2, a, b);
        re += a;
        im += b;
    }
    return {re, im};
}

bool avx2_available() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
}

#else

cplx row_sum_avx2(const CellRow& r, double x1, double x2) { return row_sum_scalar(r, x1, x2); }
bool avx2_available() { return false; }

#endif

KernelKind resolve_kernel(KernelKind k) {
    if (k == KernelKind::Auto) return avx2_available() ? KernelKind::Avx2 : KernelKind::Scalar;
    if (k == KernelKind::Avx2 && !avx2_available()) return KernelKind::Scalar;
    return k;
}

const char* kernel_name(KernelKind k) {
    switch (resolve_kernel(k)) {
        case KernelKind::Avx2: return "avx2";
        default: return "scalar";
    }
}

cplx row_sum(const CellRow& row, double x1, double x2, KernelKind k) {
    return resolve_kernel(k) == KernelKind::Avx2 ? row_sum_avx2(row, x1, x2) : row_sum_scalar(row, x1, x2);
}

}  // namespace farfield
