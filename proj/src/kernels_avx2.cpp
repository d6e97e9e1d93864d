#if defined(__x86_64__) || defined(_M_X64)

#include "bandcodes/kernels.hpp"

#include <immintrin.h>

namespace bandcodes::kernels {

bool avx2_supported() noexcept {
    return __builtin_cpu_supports("avx2") != 0;
}

__attribute__((target("avx2")))
void xor_bytes_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(a, b));
    }
    if (i < n) xor_bytes_scalar(dst + i, src + i, n - i);
}

__attribute__((target("avx2")))
void xor_words_avx2(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(a, b));
    }
    for (; i < n; ++i) dst[i] ^= src[i];
}

} // namespace bandcodes::kernels

#endif
