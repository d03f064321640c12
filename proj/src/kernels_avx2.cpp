#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "tmsim/kernels.hpp"

namespace tmsim::kernels {

namespace {

// Unsigned compare via sign-bit flip; AVX2 only has signed cmpgt.
inline __m256i cmpgt_epu64(__m256i a, __m256i b) {
    const __m256i sign = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));
    return _mm256_cmpgt_epi64(_mm256_xor_si256(a, sign), _mm256_xor_si256(b, sign));
}

inline __m256i cmpgt_epu32(__m256i a, __m256i b) {
    const __m256i sign = _mm256_set1_epi32(static_cast<int>(0x80000000u));
    return _mm256_cmpgt_epi32(_mm256_xor_si256(a, sign), _mm256_xor_si256(b, sign));
}

void over_threshold_bits_avx2(const uint32_t* values, const uint64_t* thresholds, size_t n,
                              uint64_t* out_words) {
    size_t words = (n + 63) / 64;
    for (size_t w = 0; w < words; ++w) out_words[w] = 0;

    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m128i v32 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(values + i));
        __m256i v = _mm256_cvtepu32_epi64(v32);
        __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(thresholds + i));
        __m256i gt = cmpgt_epu64(v, t);
        // one bit per 64-bit lane: movmskpd yields 4 bits
        int mask = _mm256_movemask_pd(_mm256_castsi256_pd(gt));
        out_words[i / 64] |= static_cast<uint64_t>(mask) << (i % 64);
    }
    for (; i < n; ++i) {
        if (values[i] > thresholds[i]) out_words[i / 64] |= uint64_t{1} << (i % 64);
    }
}

size_t argmax_u32_avx2(const uint32_t* values, size_t n) {
    if (n < 16) {
        size_t best = 0;
        for (size_t i = 1; i < n; ++i)
            if (values[i] > values[best]) best = i;
        return best;
    }
    __m256i best_val = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values));
    __m256i best_idx = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    __m256i idx = best_idx;
    const __m256i eight = _mm256_set1_epi32(8);
    size_t i = 8;
    for (; i + 8 <= n; i += 8) {
        idx = _mm256_add_epi32(idx, eight);
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values + i));
        __m256i gt = cmpgt_epu32(v, best_val);
        // strictly-greater blend keeps the earliest index on ties
        best_val = _mm256_blendv_epi8(best_val, v, gt);
        best_idx = _mm256_blendv_epi8(best_idx, idx, gt);
    }
    alignas(32) uint32_t vals[8];
    alignas(32) uint32_t idxs[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(vals), best_val);
    _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), best_idx);
    uint32_t bv = vals[0];
    size_t bi = idxs[0];
    for (int lane = 1; lane < 8; ++lane) {
        if (vals[lane] > bv || (vals[lane] == bv && idxs[lane] < bi)) {
            bv = vals[lane];
            bi = idxs[lane];
        }
    }
    for (; i < n; ++i) {
        if (values[i] > bv) {
            bv = values[i];
            bi = i;
        }
    }
    return bi;
}

uint64_t sum_u32_avx2(const uint32_t* values, size_t n) {
    __m256i acc = _mm256_setzero_si256();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values + i));
        acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(v)));
        acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(v, 1)));
    }
    alignas(32) uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) total += values[i];
    return total;
}

}  // namespace

const Backend& avx2_backend() {
    static const Backend b{"avx2", over_threshold_bits_avx2, argmax_u32_avx2, sum_u32_avx2};
    return b;
}

bool avx2_available() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace tmsim::kernels

#endif
