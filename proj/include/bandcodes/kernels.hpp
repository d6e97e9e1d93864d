#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Hot inner loops of the codec: in-place XOR of payload byte buffers and of
// word-packed coefficient vectors. A scalar reference implementation always
// exists; on x86 an AVX2 variant and on aarch64 a NEON variant are selected
// once at startup. All variants must be bit-identical; the test suite
// cross-checks every compiled variant against the scalar reference.

namespace bandcodes::kernels {

using XorBytesFn = void (*)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
using XorWordsFn = void (*)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);

// Scalar reference kernels. Unconditionally available.
void xor_bytes_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
void xor_words_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void xor_bytes_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
void xor_words_avx2(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
bool avx2_supported() noexcept;
#endif

#if defined(__aarch64__)
void xor_bytes_neon(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
void xor_words_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
#endif

// Dispatch table, resolved on first use.
XorBytesFn xor_bytes_fn() noexcept;
XorWordsFn xor_words_fn() noexcept;

// Name of the active variant: "scalar", "avx2" or "neon".
std::string_view active_variant() noexcept;

// dst[i] ^= src[i] over the selected variant.
inline void xor_bytes(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    xor_bytes_fn()(dst, src, n);
}

inline void xor_words(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    xor_words_fn()(dst, src, n);
}

} // namespace bandcodes::kernels
