#pragma once

#include <cstddef>
#include <cstdint>

#include "bandcodes/errors.hpp"

namespace bandcodes {

// Coefficient window of a band packet: `width` consecutive positions
// starting at `first`. Valid against a generation of N symbols when
// 1 <= width <= N and first + width <= N.
struct Window {
    std::uint32_t first = 0;
    std::uint32_t width = 0;

    std::uint32_t last() const { return first + width - 1; }

    static Window checked(std::uint32_t first, std::uint32_t width, std::size_t n) {
        Window w{first, width};
        w.validate(n);
        return w;
    }

    void validate(std::size_t n) const {
        if (width < 1 || width > n) {
            raise(ErrorKind::Parameter, "window width outside [1, N]");
        }
        if (static_cast<std::size_t>(first) + width > n) {
            raise(ErrorKind::Parameter, "window exceeds generation size");
        }
    }
};

inline bool windows_overlap(const Window& a, const Window& b) {
    return a.first <= b.last() && b.first <= a.last();
}

} // namespace bandcodes
