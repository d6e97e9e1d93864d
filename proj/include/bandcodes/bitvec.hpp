#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bandcodes/errors.hpp"
#include "bandcodes/kernels.hpp"

namespace bandcodes {

// Fixed-length GF(2) vector packed into 64-bit words: bit i lives in word
// i/64 at position i%64, LSB first. Degree is recomputed from popcounts on
// demand; nothing is cached, so XOR stays a pure word operation.
class BitVector {
public:
    static constexpr std::size_t kWordBits = 64;

    BitVector() = default;

    explicit BitVector(std::size_t n)
        : n_(n), words_((n + kWordBits - 1) / kWordBits, 0) {}

    // Parses "0"/"1" characters, index 0 first: "0010" sets bit 2.
    static BitVector from_string(std::string_view bits) {
        BitVector v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1') {
                v.set(i);
            } else if (bits[i] != '0') {
                raise(ErrorKind::Parameter, "bit string must contain only 0/1");
            }
        }
        return v;
    }

    std::size_t size() const { return n_; }

    bool get(std::size_t i) const {
        return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
    }

    void set(std::size_t i, bool value = true) {
        const std::uint64_t mask = std::uint64_t{1} << (i % kWordBits);
        if (value) {
            words_[i / kWordBits] |= mask;
        } else {
            words_[i / kWordBits] &= ~mask;
        }
    }

    void clear() { words_.assign(words_.size(), 0); }

    void xor_assign(const BitVector& other) {
        if (other.n_ != n_) {
            raise(ErrorKind::Dimension, "xor of GF(2) vectors of different length");
        }
        kernels::xor_words(words_.data(), other.words_.data(), words_.size());
    }

    std::size_t degree() const {
        std::size_t d = 0;
        for (auto w : words_) d += static_cast<std::size_t>(std::popcount(w));
        return d;
    }

    bool is_zero() const {
        for (auto w : words_) {
            if (w != 0) return false;
        }
        return true;
    }

    std::optional<std::size_t> leading_one() const {
        for (std::size_t k = 0; k < words_.size(); ++k) {
            if (words_[k] != 0) {
                return k * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[k]));
            }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> trailing_one() const {
        for (std::size_t k = words_.size(); k-- > 0;) {
            if (words_[k] != 0) {
                return k * kWordBits + (kWordBits - 1 -
                       static_cast<std::size_t>(std::countl_zero(words_[k])));
            }
        }
        return std::nullopt;
    }

    // Writes `count` bits starting at `start` from the low bits of `bits`,
    // LSB first. Requires count <= 64 and the target range to be zero or
    // overwritten deliberately.
    void deposit_bits(std::size_t start, std::size_t count, std::uint64_t bits) {
        for (std::size_t j = 0; j < count; ++j) {
            set(start + j, (bits >> j) & 1u);
        }
    }

    // Reads `count <= 64` bits starting at `start`, LSB first.
    std::uint64_t extract_bits(std::size_t start, std::size_t count) const {
        std::uint64_t out = 0;
        for (std::size_t j = 0; j < count; ++j) {
            out |= std::uint64_t{get(start + j)} << j;
        }
        return out;
    }

    std::span<const std::uint64_t> words() const { return words_; }

    std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) {
            if (get(i)) s[i] = '1';
        }
        return s;
    }

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.n_ == b.n_ && a.words_ == b.words_;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace bandcodes
