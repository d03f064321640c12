#include "tmsim/kernels.hpp"

namespace tmsim::kernels {

namespace {

void over_threshold_bits_scalar(const uint32_t* values, const uint64_t* thresholds, size_t n,
                                uint64_t* out_words) {
    size_t words = (n + 63) / 64;
    for (size_t w = 0; w < words; ++w) out_words[w] = 0;
    for (size_t i = 0; i < n; ++i) {
        if (values[i] > thresholds[i]) out_words[i / 64] |= uint64_t{1} << (i % 64);
    }
}

size_t argmax_u32_scalar(const uint32_t* values, size_t n) {
    size_t best = 0;
    for (size_t i = 1; i < n; ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

uint64_t sum_u32_scalar(const uint32_t* values, size_t n) {
    uint64_t acc = 0;
    for (size_t i = 0; i < n; ++i) acc += values[i];
    return acc;
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar", over_threshold_bits_scalar, argmax_u32_scalar,
                           sum_u32_scalar};
    return b;
}

}  // namespace tmsim::kernels
