#include "bandcodes/packet.hpp"

#include <cstring>

namespace bandcodes {

namespace {

constexpr char kMagic[4] = {'B', 'C', '0', '1'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

struct Reader {
    const std::uint8_t* p;
    std::size_t left;

    void need(std::size_t n) const {
        if (left < n) raise(ErrorKind::Malformed, "truncated packet");
    }

    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        left -= 2;
        return v;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
};

} // namespace

std::size_t serialized_packet_size(std::size_t coeff_width, std::size_t payload_size) {
    return 4 + 4 + 2 + 2 + 2 + (coeff_width + 7) / 8 + 4 + payload_size;
}

std::vector<std::uint8_t> serialize_packet(const BandPacket& pkt) {
    const std::size_t n = pkt.coeffs.size();
    if (n == 0 || n > 0xffff) {
        raise(ErrorKind::Parameter, "coefficient vector length outside [1, 65535]");
    }
    pkt.window.validate(n);
    if (!pkt.support_in_window()) {
        raise(ErrorKind::Malformed, "coefficient support outside declared window");
    }

    std::vector<std::uint8_t> out;
    out.reserve(serialized_packet_size(pkt.window.width, pkt.payload.size()));
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, pkt.generation_id);
    put_u16(out, static_cast<std::uint16_t>(n));
    put_u16(out, static_cast<std::uint16_t>(pkt.window.width));
    put_u16(out, static_cast<std::uint16_t>(pkt.window.first));

    const std::size_t nbytes = (pkt.window.width + 7) / 8;
    for (std::size_t b = 0; b < nbytes; ++b) {
        std::uint8_t byte = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            const std::size_t k = b * 8 + j;
            if (k < pkt.window.width && pkt.coeffs.get(pkt.window.first + k)) {
                byte |= static_cast<std::uint8_t>(1u << j);
            }
        }
        out.push_back(byte);
    }

    put_u32(out, static_cast<std::uint32_t>(pkt.payload.size()));
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

BandPacket deserialize_packet(const std::uint8_t* data, std::size_t size) {
    Reader r{data, size};
    r.need(4);
    if (std::memcmp(r.p, kMagic, 4) != 0) {
        raise(ErrorKind::Malformed, "bad magic");
    }
    r.p += 4;
    r.left -= 4;

    BandPacket pkt;
    pkt.generation_id = r.u32();
    const std::uint16_t n = r.u16();
    const std::uint16_t w = r.u16();
    const std::uint16_t f = r.u16();
    if (n == 0 || w == 0 || w > n || static_cast<std::size_t>(f) + w > n) {
        raise(ErrorKind::Malformed, "inconsistent window header");
    }
    pkt.window = Window{f, w};

    const std::size_t nbytes = (static_cast<std::size_t>(w) + 7) / 8;
    r.need(nbytes);
    pkt.coeffs = BitVector(n);
    for (std::size_t b = 0; b < nbytes; ++b) {
        const std::uint8_t byte = r.p[b];
        for (std::size_t j = 0; j < 8; ++j) {
            const std::size_t k = b * 8 + j;
            if (k < w && ((byte >> j) & 1u)) {
                pkt.coeffs.set(f + k);
            }
        }
    }
    // Padding bits past W must be zero.
    for (std::size_t k = w; k < nbytes * 8; ++k) {
        if ((r.p[k / 8] >> (k % 8)) & 1u) {
            raise(ErrorKind::Malformed, "nonzero padding in coefficient bytes");
        }
    }
    r.p += nbytes;
    r.left -= nbytes;

    const std::uint32_t plen = r.u32();
    r.need(plen);
    pkt.payload.assign(r.p, r.p + plen);
    r.p += plen;
    r.left -= plen;
    if (r.left != 0) {
        raise(ErrorKind::Malformed, "trailing bytes after packet");
    }
    return pkt;
}

} // namespace bandcodes
