#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bandcodes/degree_model.hpp"
#include "bandcodes/packet.hpp"

namespace bandcodes {

// Leading-edge law for width-w windows over n symbols: mass (w+1)/(2n) at
// f = 0 and f = n-w, mass 1/n at every interior position; degenerate at
// f = 0 when w = n. leading_edge_from_index maps a uniform draw r in
// [0, 2n) to f so the law is realized exactly in integer arithmetic.
std::size_t leading_edge_from_index(std::uint64_t r, std::size_t n, std::size_t w);
std::size_t draw_leading_edge(std::size_t n, std::size_t w, Rng& rng);

// Source packet: window start from the leading-edge law, in-window
// coefficients fair coins with the all-zero draw rejected.
BandPacket encode_source_packet(const Generation& gen, std::size_t w, Rng& rng);

// Dense random coding over the whole generation (window = [0, n)).
BandPacket reference_nc_encode(const Generation& gen, Rng& rng);

// Dense coding with the degree drawn from `degrees` (e.g. a robust soliton)
// and the support a uniform subset of that size.
BandPacket reference_nc_encode(const Generation& gen, const DegreeDistribution& degrees,
                               Rng& rng);

enum class ReceiveResult { Innovative, Duplicate };

struct XorCounters {
    std::uint64_t triangularization = 0;
    std::uint64_t diagonalization = 0;
    std::uint64_t total() const { return triangularization + diagonalization; }
};

struct DecoderReport {
    std::size_t n = 0;
    std::size_t w = 0;
    std::size_t rank = 0;
    bool complete = false;
    std::uint64_t packets_received = 0;
    // Packets consumed up to the moment rank reached n; unset while short.
    std::optional<std::uint64_t> packets_to_complete;
    // packets_to_complete / n - 1.
    std::optional<double> overhead;
    XorCounters xors;
};

// Incremental Gaussian elimination over GF(2) that keeps the decoding
// matrix banded upper-triangular: the non-empty row i has its leading one
// at column i and support inside [i, i + w - 1]. On a collision the
// incoming packet is swapped into the matrix and the displaced row
// continues the elimination walk, which keeps stored rows fresh;
// swap_enabled=false falls back to eliminating the incoming packet in
// place so the effect of the swap can be measured.
class SgeState {
public:
    SgeState(std::uint32_t generation_id, std::size_t n, std::size_t w,
             std::size_t symbol_size, bool swap_enabled = true);

    ReceiveResult receive(BandPacket pkt);

    std::size_t rank() const { return rank_; }
    bool complete() const { return rank_ == n_; }

    // Full back-substitution; requires a complete state. Idempotent: a
    // second call finds a diagonal matrix and costs zero XORs.
    std::vector<Payload> diagonalize();
    bool diagonalized() const { return diagonalized_; }

    const XorCounters& counters() const { return counters_; }
    DecoderReport report() const;

    std::uint32_t generation_id() const { return generation_id_; }
    std::size_t n() const { return n_; }
    std::size_t w() const { return w_; }
    std::size_t symbol_size() const { return symbol_size_; }

    bool row_occupied(std::size_t i) const { return rows_[i].occupied; }
    const BitVector& row_coeffs(std::size_t i) const;
    const Payload& row_payload(std::size_t i) const;
    std::size_t row_trailing(std::size_t i) const;

    // Checks the banded upper-triangular invariant on every stored row.
    bool band_structure_ok() const;

private:
    struct Row {
        BitVector coeffs;
        Payload payload;
        std::size_t trailing = 0;
        bool occupied = false;
    };

    std::uint32_t generation_id_;
    std::size_t n_;
    std::size_t w_;
    std::size_t symbol_size_;
    bool swap_enabled_;
    std::vector<Row> rows_;
    std::size_t rank_ = 0;
    bool diagonalized_ = false;
    std::uint64_t received_ = 0;
    std::optional<std::uint64_t> completed_after_;
    XorCounters counters_;
};

// Rows of `st` whose support fits entirely inside `win` (leading one at or
// after win.first, trailing one at or before win.last()).
std::vector<std::size_t> eligible_rows(const SgeState& st, const Window& win);

// Fair-coin recombination of the stored rows inside a freshly drawn
// width-w window. The window start is redrawn while no stored row fits,
// up to 8*(n-w+1) times; after that every feasible start is enumerated and
// one is chosen uniformly, so the draw cannot stall on sparse states.
BandPacket recombine(const SgeState& st, std::size_t w, Rng& rng);

// Fair-coin combination of buffered packets (dense recoding). All packets
// must belong to one generation and share dimensions.
BandPacket reference_nc_recombine(const std::vector<BandPacket>& buffer, Rng& rng);

// Fair-coin combination of the stored rows of a dense decoder state.
BandPacket reference_nc_recombine(const SgeState& st, Rng& rng);

} // namespace bandcodes
