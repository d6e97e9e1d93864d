#if defined(__aarch64__)

#include "bandcodes/kernels.hpp"

#include <arm_neon.h>

namespace bandcodes::kernels {

void xor_bytes_neon(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        uint8x16_t a = vld1q_u8(dst + i);
        uint8x16_t b = vld1q_u8(src + i);
        vst1q_u8(dst + i, veorq_u8(a, b));
    }
    if (i < n) xor_bytes_scalar(dst + i, src + i, n - i);
}

void xor_words_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t a = vld1q_u64(dst + i);
        uint64x2_t b = vld1q_u64(src + i);
        vst1q_u64(dst + i, veorq_u64(a, b));
    }
    for (; i < n; ++i) dst[i] ^= src[i];
}

} // namespace bandcodes::kernels

#endif
