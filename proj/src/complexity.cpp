#include "bandcodes/complexity.hpp"

#include "bandcodes/errors.hpp"

namespace bandcodes {

namespace {

void check(std::size_t n, std::size_t w) {
    if (n < 1 || w < 1 || w > n) {
        raise(ErrorKind::Parameter, "complexity model needs 1 <= w <= n");
    }
}

} // namespace

ComplexityPrediction predict(std::size_t n, std::size_t w) {
    check(n, w);
    const double nd = static_cast<double>(n);
    const double wd = static_cast<double>(w);
    ComplexityPrediction p;
    p.cd_tri = wd * (nd - 2.0) / 4.0;
    p.cd_diag = (2.0 * nd * wd - wd * wd - 1.0) / 4.0;
    p.cd_total = (3.0 * nd * wd - wd * wd - 2.0 * wd - 1.0) / 4.0;
    return p;
}

double triangularization_sum_form(std::size_t n, std::size_t w) {
    check(n, w);
    return static_cast<double>(w) * (static_cast<double>(n) - 1.0) / 4.0;
}

double xors_per_megabit(std::size_t n, std::size_t w, std::size_t symbol_size) {
    check(n, w);
    if (symbol_size == 0) {
        raise(ErrorKind::Parameter, "symbol size must be >= 1");
    }
    const double bits = static_cast<double>(n) * static_cast<double>(symbol_size) * 8.0;
    return predict(n, w).cd_total * 1e6 / bits;
}

} // namespace bandcodes
