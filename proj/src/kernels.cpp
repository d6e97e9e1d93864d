#include "bandcodes/kernels.hpp"

#include <cstring>

namespace bandcodes::kernels {

void xor_bytes_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    // Word-at-a-time body with byte tail; buffers may be unaligned, so the
    // words are moved with memcpy.
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        std::uint64_t a, b;
        std::memcpy(&a, dst + i, 8);
        std::memcpy(&b, src + i, 8);
        a ^= b;
        std::memcpy(dst + i, &a, 8);
    }
    for (; i < n; ++i) dst[i] ^= src[i];
}

void xor_words_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

namespace {

struct Dispatch {
    XorBytesFn bytes;
    XorWordsFn words;
    std::string_view name;
};

Dispatch resolve() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return {&xor_bytes_avx2, &xor_words_avx2, "avx2"};
#endif
#if defined(__aarch64__)
    return {&xor_bytes_neon, &xor_words_neon, "neon"};
#endif
    return {&xor_bytes_scalar, &xor_words_scalar, "scalar"};
}

const Dispatch& table() noexcept {
    static const Dispatch d = resolve();
    return d;
}

} // namespace

XorBytesFn xor_bytes_fn() noexcept { return table().bytes; }
XorWordsFn xor_words_fn() noexcept { return table().words; }
std::string_view active_variant() noexcept { return table().name; }

} // namespace bandcodes::kernels
