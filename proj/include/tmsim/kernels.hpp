#ifndef TMSIM_KERNELS_HPP
#define TMSIM_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <span>

// Flat scans over the dense per-queue occupancy array. These run once per
// cell-slot, so they are the simulator's inner loops: the over-threshold
// comparator sweep feeding the head-drop bitmap, the longest-queue max
// scan, and the occupancy sum behind the conservation check.
//
// Each kernel has a scalar reference implementation and an AVX2 variant;
// the active backend is chosen once at startup from CPUID and can be
// forced to scalar with TMSIM_FORCE_SCALAR=1. Both backends must return
// bit-identical results (see tests/test_kernels.cpp).
namespace tmsim::kernels {

struct Backend {
    const char* name;
    // out_words[i/64] bit (i%64) = values[i] > thresholds[i]
    void (*over_threshold_bits)(const uint32_t* values, const uint64_t* thresholds, size_t n,
                                uint64_t* out_words);
    // index of the maximum element, lowest index on ties; n must be > 0
    size_t (*argmax_u32)(const uint32_t* values, size_t n);
    uint64_t (*sum_u32)(const uint32_t* values, size_t n);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
bool avx2_available();
#endif

/// Backend selected at startup (AVX2 when the CPU supports it).
const Backend& active_backend();

inline void over_threshold_bits(std::span<const uint32_t> values,
                                std::span<const uint64_t> thresholds,
                                std::span<uint64_t> out_words) {
    active_backend().over_threshold_bits(values.data(), thresholds.data(), values.size(),
                                         out_words.data());
}

inline size_t argmax_u32(std::span<const uint32_t> values) {
    return active_backend().argmax_u32(values.data(), values.size());
}

inline uint64_t sum_u32(std::span<const uint32_t> values) {
    return active_backend().sum_u32(values.data(), values.size());
}

}  // namespace tmsim::kernels

#endif
