#include "bandcodes/codec.hpp"

#include <algorithm>
#include <utility>

namespace bandcodes {

namespace {

void check_band_params(std::size_t n, std::size_t w) {
    if (n < 1 || w < 1 || w > n) {
        raise(ErrorKind::Parameter, "band parameters need 1 <= w <= n");
    }
}

// Fills coeffs[start .. start+width) with fair coins taken LSB-first from
// consecutive rng words; the all-zero pattern is rejected and redrawn.
void fill_window_coins(BitVector& coeffs, std::size_t start, std::size_t width, Rng& rng) {
    const std::size_t nwords = (width + 63) / 64;
    std::vector<std::uint64_t> bits(nwords);
    bool nonzero = false;
    while (!nonzero) {
        for (std::size_t k = 0; k < nwords; ++k) {
            bits[k] = rng.next_u64();
        }
        const std::size_t tail = width % 64;
        if (tail != 0) {
            bits[nwords - 1] &= (std::uint64_t{1} << tail) - 1;
        }
        for (auto b : bits) nonzero |= (b != 0);
    }
    for (std::size_t k = 0; k < nwords; ++k) {
        const std::size_t count = std::min<std::size_t>(64, width - k * 64);
        coeffs.deposit_bits(start + k * 64, count, bits[k]);
    }
}

Payload combine_symbols(const Generation& gen, const BitVector& coeffs) {
    Payload out(gen.symbol_size(), 0);
    for (std::size_t i = 0; i < gen.n(); ++i) {
        if (coeffs.get(i)) xor_payload(out, gen.symbols[i]);
    }
    return out;
}

} // namespace

std::size_t leading_edge_from_index(std::uint64_t r, std::size_t n, std::size_t w) {
    check_band_params(n, w);
    if (r >= 2 * n) raise(ErrorKind::Parameter, "leading-edge index outside [0, 2n)");
    if (w == n) return 0;
    if (r < w + 1) return 0;
    if (r < 2 * (w + 1)) return n - w;
    return 1 + static_cast<std::size_t>((r - 2 * (w + 1)) / 2);
}

std::size_t draw_leading_edge(std::size_t n, std::size_t w, Rng& rng) {
    check_band_params(n, w);
    return leading_edge_from_index(rng.uniform(2 * n), n, w);
}

BandPacket encode_source_packet(const Generation& gen, std::size_t w, Rng& rng) {
    const std::size_t n = gen.n();
    check_band_params(n, w);
    if (gen.symbol_size() == 0) raise(ErrorKind::Parameter, "empty generation");

    BandPacket pkt;
    pkt.generation_id = gen.id;
    const std::size_t f = draw_leading_edge(n, w, rng);
    pkt.window = Window{static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(w)};
    pkt.coeffs = BitVector(n);
    fill_window_coins(pkt.coeffs, f, w, rng);
    pkt.payload = combine_symbols(gen, pkt.coeffs);
    return pkt;
}

BandPacket reference_nc_encode(const Generation& gen, Rng& rng) {
    return encode_source_packet(gen, gen.n(), rng);
}

BandPacket reference_nc_encode(const Generation& gen, const DegreeDistribution& degrees,
                               Rng& rng) {
    const std::size_t n = gen.n();
    check_band_params(n, n);
    if (degrees.max_degree() != n) {
        raise(ErrorKind::Parameter, "degree distribution must cover [0, n]");
    }
    std::size_t d = 0;
    while (d == 0) d = degrees.sample(rng);

    BandPacket pkt;
    pkt.generation_id = gen.id;
    pkt.window = Window{0, static_cast<std::uint32_t>(n)};
    pkt.coeffs = BitVector(n);
    std::vector<std::size_t> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = i;
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.uniform(n - j));
        std::swap(positions[j], positions[pick]);
        pkt.coeffs.set(positions[j]);
    }
    pkt.payload = combine_symbols(gen, pkt.coeffs);
    return pkt;
}

SgeState::SgeState(std::uint32_t generation_id, std::size_t n, std::size_t w,
                   std::size_t symbol_size, bool swap_enabled)
    : generation_id_(generation_id), n_(n), w_(w), symbol_size_(symbol_size),
      swap_enabled_(swap_enabled), rows_(n) {
    check_band_params(n, w);
    if (n > 0xffff) raise(ErrorKind::Parameter, "generation size exceeds 65535");
    if (symbol_size == 0) raise(ErrorKind::Parameter, "symbol size must be >= 1");
}

ReceiveResult SgeState::receive(BandPacket pkt) {
    if (pkt.generation_id != generation_id_) {
        raise(ErrorKind::Routing, "packet belongs to a different generation");
    }
    if (pkt.coeffs.size() != n_) {
        raise(ErrorKind::Dimension, "coefficient vector length mismatch");
    }
    if (pkt.payload.size() != symbol_size_) {
        raise(ErrorKind::Dimension, "payload size mismatch");
    }

    ++received_;
    if (pkt.coeffs.is_zero()) {
        return ReceiveResult::Duplicate;
    }
    // Acceptance is based on the actual support, not the declared window:
    // a misdeclared header is harmless as long as the code is banded.
    {
        const std::size_t s = *pkt.coeffs.leading_one();
        const std::size_t t = *pkt.coeffs.trailing_one();
        if (t - s + 1 > w_) {
            raise(ErrorKind::Malformed, "coefficient support wider than the band");
        }
    }

    BitVector g = std::move(pkt.coeffs);
    Payload y = std::move(pkt.payload);
    for (;;) {
        const std::size_t s = *g.leading_one();
        Row& row = rows_[s];
        if (!row.occupied) {
            row.trailing = *g.trailing_one();
            row.coeffs = std::move(g);
            row.payload = std::move(y);
            row.occupied = true;
            ++rank_;
            if (rank_ == n_ && !completed_after_) {
                completed_after_ = received_;
            }
            return ReceiveResult::Innovative;
        }
        if (swap_enabled_) {
            std::swap(g, row.coeffs);
            std::swap(y, row.payload);
            row.trailing = *row.coeffs.trailing_one();
        }
        if (g == row.coeffs) {
            if (y != row.payload) {
                raise(ErrorKind::Consistency,
                      "equal coefficients with different payloads");
            }
            return ReceiveResult::Duplicate;
        }
        g.xor_assign(row.coeffs);
        xor_payload(y, row.payload);
        ++counters_.triangularization;
        // The XOR clears column s and cannot zero g (equality was checked),
        // so the walk strictly advances and terminates within n steps.
    }
}

std::vector<Payload> SgeState::diagonalize() {
    if (!complete()) {
        raise(ErrorKind::NotReady, "diagonalization requires full rank");
    }
    if (!diagonalized_) {
        std::vector<std::size_t> ones;
        for (std::size_t i = n_ - 1; i-- > 0;) {
            Row& row = rows_[i];
            ones.clear();
            for (std::size_t j = i + 1; j <= row.trailing; ++j) {
                if (row.coeffs.get(j)) ones.push_back(j);
            }
            // Rows below i are already unit vectors, so each XOR clears
            // exactly one column.
            for (const std::size_t j : ones) {
                row.coeffs.xor_assign(rows_[j].coeffs);
                xor_payload(row.payload, rows_[j].payload);
                ++counters_.diagonalization;
            }
            row.trailing = i;
        }
        diagonalized_ = true;
    }
    std::vector<Payload> symbols;
    symbols.reserve(n_);
    for (const Row& row : rows_) symbols.push_back(row.payload);
    return symbols;
}

DecoderReport SgeState::report() const {
    DecoderReport r;
    r.n = n_;
    r.w = w_;
    r.rank = rank_;
    r.complete = complete();
    r.packets_received = received_;
    r.packets_to_complete = completed_after_;
    if (completed_after_) {
        r.overhead = static_cast<double>(*completed_after_) / static_cast<double>(n_) - 1.0;
    }
    r.xors = counters_;
    return r;
}

const BitVector& SgeState::row_coeffs(std::size_t i) const {
    if (!rows_[i].occupied) raise(ErrorKind::Parameter, "row is empty");
    return rows_[i].coeffs;
}

const Payload& SgeState::row_payload(std::size_t i) const {
    if (!rows_[i].occupied) raise(ErrorKind::Parameter, "row is empty");
    return rows_[i].payload;
}

std::size_t SgeState::row_trailing(std::size_t i) const {
    if (!rows_[i].occupied) raise(ErrorKind::Parameter, "row is empty");
    return rows_[i].trailing;
}

bool SgeState::band_structure_ok() const {
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        const Row& row = rows_[i];
        if (!row.occupied) continue;
        ++occupied;
        const auto lead = row.coeffs.leading_one();
        if (!lead || *lead != i) return false;
        const auto trail = row.coeffs.trailing_one();
        if (*trail != row.trailing) return false;
        if (*trail - i + 1 > w_) return false;
    }
    return occupied == rank_;
}

std::vector<std::size_t> eligible_rows(const SgeState& st, const Window& win) {
    std::vector<std::size_t> rows;
    const std::size_t hi = std::min<std::size_t>(win.last(), st.n() - 1);
    for (std::size_t i = win.first; i <= hi; ++i) {
        if (st.row_occupied(i) && st.row_trailing(i) <= win.last()) {
            rows.push_back(i);
        }
    }
    return rows;
}

namespace {

// Fair-coin row selection with the all-zero subset redrawn; rows are
// linearly independent, so only the empty subset combines to zero.
std::vector<std::size_t> coin_subset(const std::vector<std::size_t>& rows, Rng& rng) {
    const std::size_t nwords = (rows.size() + 63) / 64;
    std::vector<std::uint64_t> coins(nwords);
    for (;;) {
        bool any = false;
        for (std::size_t k = 0; k < nwords; ++k) {
            coins[k] = rng.next_u64();
            if (k == nwords - 1 && rows.size() % 64 != 0) {
                coins[k] &= (std::uint64_t{1} << (rows.size() % 64)) - 1;
            }
            any |= (coins[k] != 0);
        }
        if (!any) continue;
        std::vector<std::size_t> picked;
        for (std::size_t idx = 0; idx < rows.size(); ++idx) {
            if ((coins[idx / 64] >> (idx % 64)) & 1u) picked.push_back(rows[idx]);
        }
        return picked;
    }
}

BandPacket combine_rows(const SgeState& st, const Window& win,
                        const std::vector<std::size_t>& picked) {
    BandPacket pkt;
    pkt.generation_id = st.generation_id();
    pkt.window = win;
    pkt.coeffs = BitVector(st.n());
    pkt.payload.assign(st.symbol_size(), 0);
    for (const std::size_t i : picked) {
        pkt.coeffs.xor_assign(st.row_coeffs(i));
        xor_payload(pkt.payload, st.row_payload(i));
    }
    return pkt;
}

} // namespace

BandPacket recombine(const SgeState& st, std::size_t w, Rng& rng) {
    const std::size_t n = st.n();
    check_band_params(n, w);
    if (st.rank() == 0) {
        raise(ErrorKind::NoData, "recombination from an empty state");
    }

    const std::size_t max_attempts = 8 * (n - w + 1);
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        const std::size_t f = draw_leading_edge(n, w, rng);
        const Window win{static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(w)};
        const auto rows = eligible_rows(st, win);
        if (!rows.empty()) {
            return combine_rows(st, win, coin_subset(rows, rng));
        }
    }

    // Random retries exhausted: enumerate every feasible window start and
    // pick one uniformly. Each stored row with leading one i and trailing
    // one t fits windows starting in [max(0, t-w+1), min(i, n-w)], a
    // non-empty range, so a non-empty state always yields a candidate.
    std::vector<std::uint8_t> feasible(n - w + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!st.row_occupied(i)) continue;
        const std::size_t t = st.row_trailing(i);
        const std::size_t lo = t >= w ? t - w + 1 : 0;
        const std::size_t hi = std::min(i, n - w);
        for (std::size_t f = lo; f <= hi; ++f) feasible[f] = 1;
    }
    std::vector<std::size_t> starts;
    for (std::size_t f = 0; f < feasible.size(); ++f) {
        if (feasible[f]) starts.push_back(f);
    }
    if (starts.empty()) {
        raise(ErrorKind::RetryExhausted, "no window admits a stored row");
    }
    const std::size_t f = starts[rng.uniform(starts.size())];
    const Window win{static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(w)};
    return combine_rows(st, win, coin_subset(eligible_rows(st, win), rng));
}

BandPacket reference_nc_recombine(const std::vector<BandPacket>& buffer, Rng& rng) {
    if (buffer.empty()) {
        raise(ErrorKind::NoData, "recombination from an empty buffer");
    }
    const std::size_t n = buffer.front().coeffs.size();
    const std::size_t psize = buffer.front().payload.size();
    const std::uint32_t gid = buffer.front().generation_id;
    for (const auto& p : buffer) {
        if (p.generation_id != gid) {
            raise(ErrorKind::Routing, "buffer mixes generations");
        }
        if (p.coeffs.size() != n || p.payload.size() != psize) {
            raise(ErrorKind::Dimension, "buffer mixes packet dimensions");
        }
    }

    BandPacket pkt;
    pkt.generation_id = gid;
    pkt.window = Window{0, static_cast<std::uint32_t>(n)};
    pkt.coeffs = BitVector(n);
    pkt.payload.assign(psize, 0);
    // Unlike stored decoder rows, buffered packets may be dependent, so a
    // non-empty coin subset can still combine to zero; redraw on that too.
    for (;;) {
        pkt.coeffs.clear();
        std::fill(pkt.payload.begin(), pkt.payload.end(), 0);
        bool any = false;
        std::size_t idx = 0;
        while (idx < buffer.size()) {
            std::uint64_t coins = rng.next_u64();
            const std::size_t count = std::min<std::size_t>(64, buffer.size() - idx);
            for (std::size_t b = 0; b < count; ++b) {
                if ((coins >> b) & 1u) {
                    pkt.coeffs.xor_assign(buffer[idx + b].coeffs);
                    xor_payload(pkt.payload, buffer[idx + b].payload);
                    any = true;
                }
            }
            idx += count;
        }
        if (any && !pkt.coeffs.is_zero()) return pkt;
    }
}

BandPacket reference_nc_recombine(const SgeState& st, Rng& rng) {
    if (st.rank() == 0) {
        raise(ErrorKind::NoData, "recombination from an empty state");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < st.n(); ++i) {
        if (st.row_occupied(i)) rows.push_back(i);
    }
    const Window win{0, static_cast<std::uint32_t>(st.n())};
    return combine_rows(st, win, coin_subset(rows, rng));
}

} // namespace bandcodes
