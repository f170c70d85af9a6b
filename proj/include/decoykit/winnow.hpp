#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#if OPENSSL_VERSION_NUMBER < 0x30000000L
#include <openssl/hmac.h>
#endif

#include "decoykit/bitstring.hpp"

// Chaffing-and-winnowing transport: serial-numbered packets carry a payload
// in the clear plus an HMAC-SHA1 tag truncated to tau bits. Wheat packets
// have valid tags; chaff packets carry random tags and ride along to confuse
// anyone without the key. The receiver winnows by recomputing tags. There is
// no encryption anywhere in this module.
namespace decoykit::winnow {

inline constexpr std::array<int, 4> kAllowedTagBits = {16, 32, 64, 160};
inline constexpr std::size_t kSecretBytes = 32;
inline constexpr std::size_t kMaxPayload = 65535;

struct WinnowKey {
    std::array<std::uint8_t, kSecretBytes> secret{};
    int tag_bits = 64;

    WinnowKey() = default;
    WinnowKey(const std::array<std::uint8_t, kSecretBytes>& s, int tau)
        : secret(s), tag_bits(tau) {
        bool ok = false;
        for (int t : kAllowedTagBits) {
            if (t == tau) ok = true;
        }
        if (!ok) {
            throw std::invalid_argument("winnow key: tau must be one of 16, 32, 64, 160");
        }
    }

    std::size_t tag_bytes() const { return static_cast<std::size_t>(tag_bits) / 8; }
};

struct Packet {
    std::uint32_t serial = 0;
    std::vector<std::uint8_t> payload;
    std::vector<std::uint8_t> tag;
};

/// Full 20-byte HMAC-SHA1 digest, via OpenSSL.
inline std::array<std::uint8_t, 20> hmac_sha1(const std::uint8_t* key, std::size_t key_len,
                                              const std::uint8_t* data, std::size_t data_len) {
    std::array<std::uint8_t, 20> digest{};
#if OPENSSL_VERSION_NUMBER >= 0x30000000L
    std::size_t out_len = 0;
    if (EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA1", nullptr, key, key_len, data, data_len,
                  digest.data(), digest.size(), &out_len) == nullptr ||
        out_len != digest.size()) {
        throw std::runtime_error("hmac_sha1: computation failed");
    }
#else
    unsigned int out_len = 0;
    if (HMAC(EVP_sha1(), key, static_cast<int>(key_len), data, data_len, digest.data(),
             &out_len) == nullptr ||
        out_len != digest.size()) {
        throw std::runtime_error("hmac_sha1: computation failed");
    }
#endif
    return digest;
}

/// Leftmost tau bits of HMAC-SHA1(secret, serial-as-4-bytes-big-endian || payload).
inline std::vector<std::uint8_t> mac_tag(const WinnowKey& key, std::uint32_t serial,
                                         const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> data;
    data.reserve(4 + payload.size());
    data.push_back(static_cast<std::uint8_t>(serial >> 24));
    data.push_back(static_cast<std::uint8_t>(serial >> 16));
    data.push_back(static_cast<std::uint8_t>(serial >> 8));
    data.push_back(static_cast<std::uint8_t>(serial));
    data.insert(data.end(), payload.begin(), payload.end());
    const auto digest = hmac_sha1(key.secret.data(), key.secret.size(), data.data(), data.size());
    return {digest.begin(), digest.begin() + static_cast<std::ptrdiff_t>(key.tag_bytes())};
}

/// Probability that a uniformly random tag validates: 2^-tau.
inline double forgery_probability(int tag_bits) {
    if (tag_bits < 1) throw std::invalid_argument("forgery_probability: tau must be >= 1");
    return std::ldexp(1.0, -tag_bits);
}

// ---- message splitting ----

struct Granularity {
    enum class Kind { bit, nibble, byte, block };
    Kind kind = Kind::byte;
    std::size_t block_size = 1; // only for Kind::block

    static Granularity bit() { return {Kind::bit, 1}; }
    static Granularity nibble() { return {Kind::nibble, 1}; }
    static Granularity byte() { return {Kind::byte, 1}; }
    static Granularity block(std::size_t k) {
        if (k == 0) throw std::invalid_argument("granularity: block size must be positive");
        return {Kind::block, k};
    }

    /// Parse "bit" | "nibble" | "byte" | "block:<k>".
    static Granularity parse(std::string_view text) {
        if (text == "bit") return bit();
        if (text == "nibble") return nibble();
        if (text == "byte") return byte();
        if (text.rfind("block:", 0) == 0) {
            try {
                return block(std::stoul(std::string(text.substr(6))));
            } catch (const std::exception&) {
                throw std::invalid_argument("granularity: bad block size in '" +
                                            std::string(text) + "'");
            }
        }
        throw std::invalid_argument("granularity: expected bit, nibble, byte or block:<k>");
    }

    std::string to_string() const {
        switch (kind) {
            case Kind::bit: return "bit";
            case Kind::nibble: return "nibble";
            case Kind::byte: return "byte";
            case Kind::block: return "block:" + std::to_string(block_size);
        }
        return "byte";
    }
};

/// Split a message into (serial, payload) pieces, serials starting at 1.
/// Bit pieces are one byte valued 0/1, nibble pieces one byte 0x0..0xf (high
/// nibble first), so every payload stays a byte sequence on the wire.
inline std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> split_message(
    const std::vector<std::uint8_t>& msg, Granularity g) {
    std::uint64_t count = 0;
    switch (g.kind) {
        case Granularity::Kind::bit: count = static_cast<std::uint64_t>(msg.size()) * 8; break;
        case Granularity::Kind::nibble: count = static_cast<std::uint64_t>(msg.size()) * 2; break;
        case Granularity::Kind::byte: count = msg.size(); break;
        case Granularity::Kind::block: count = (msg.size() + g.block_size - 1) / g.block_size; break;
    }
    if (count > 0xffffffffull) {
        throw std::length_error("split_message: message needs " + std::to_string(count) +
                                " serials, exceeding the 32-bit serial space");
    }
    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> out;
    out.reserve(static_cast<std::size_t>(count));
    std::uint32_t serial = 1;
    switch (g.kind) {
        case Granularity::Kind::bit:
            for (std::uint8_t b : msg) {
                for (int k = 7; k >= 0; --k) {
                    out.emplace_back(serial++, std::vector<std::uint8_t>{
                                                   static_cast<std::uint8_t>((b >> k) & 1u)});
                }
            }
            break;
        case Granularity::Kind::nibble:
            for (std::uint8_t b : msg) {
                out.emplace_back(serial++,
                                 std::vector<std::uint8_t>{static_cast<std::uint8_t>(b >> 4)});
                out.emplace_back(serial++,
                                 std::vector<std::uint8_t>{static_cast<std::uint8_t>(b & 0x0f)});
            }
            break;
        case Granularity::Kind::byte:
            for (std::uint8_t b : msg) {
                out.emplace_back(serial++, std::vector<std::uint8_t>{b});
            }
            break;
        case Granularity::Kind::block:
            for (std::size_t i = 0; i < msg.size(); i += g.block_size) {
                const std::size_t n = std::min(g.block_size, msg.size() - i);
                out.emplace_back(serial++, std::vector<std::uint8_t>(msg.begin() + static_cast<std::ptrdiff_t>(i),
                                                                     msg.begin() + static_cast<std::ptrdiff_t>(i + n)));
            }
            break;
    }
    return out;
}

/// Concatenate payloads back into a message at the stated granularity.
/// Sub-byte pieces that do not fill a final byte (possible on gappy streams)
/// are dropped; the winnow report's gap counter flags that case.
inline std::vector<std::uint8_t> join_payloads(const std::vector<std::vector<std::uint8_t>>& payloads,
                                               Granularity g) {
    std::vector<std::uint8_t> out;
    switch (g.kind) {
        case Granularity::Kind::bit: {
            std::uint8_t acc = 0;
            int filled = 0;
            for (const auto& p : payloads) {
                if (p.size() != 1) {
                    throw std::invalid_argument("join_payloads: bit piece must be one byte");
                }
                acc = static_cast<std::uint8_t>((acc << 1) | (p[0] & 1u));
                if (++filled == 8) {
                    out.push_back(acc);
                    acc = 0;
                    filled = 0;
                }
            }
            break;
        }
        case Granularity::Kind::nibble: {
            std::uint8_t acc = 0;
            int filled = 0;
            for (const auto& p : payloads) {
                if (p.size() != 1) {
                    throw std::invalid_argument("join_payloads: nibble piece must be one byte");
                }
                acc = static_cast<std::uint8_t>((acc << 4) | (p[0] & 0x0fu));
                if (++filled == 2) {
                    out.push_back(acc);
                    acc = 0;
                    filled = 0;
                }
            }
            break;
        }
        case Granularity::Kind::byte:
        case Granularity::Kind::block:
            for (const auto& p : payloads) out.insert(out.end(), p.begin(), p.end());
            break;
    }
    return out;
}

// ---- chaffing ----

struct ChaffStrategy {
    enum class Kind {
        bit_complement, // chaff payload is the bitwise complement of the wheat
        decoy_text,     // chaff payload drawn from a list of plausible texts
        random_payload, // chaff payload is uniformly random, same length
    };

    Kind kind = Kind::random_payload;
    std::vector<std::vector<std::uint8_t>> decoys;
    std::size_t chaff_per_wheat = 1;
    bool distinct_serials = false;        // decoy_text only: renumber the stream serially
    Granularity granularity = Granularity::byte(); // masks complements/randoms to the piece domain

    static ChaffStrategy bit_complement(std::size_t per_wheat,
                                        Granularity g = Granularity::byte()) {
        check_count(per_wheat);
        ChaffStrategy s;
        s.kind = Kind::bit_complement;
        s.chaff_per_wheat = per_wheat;
        s.granularity = g;
        return s;
    }

    static ChaffStrategy decoy_text(std::vector<std::vector<std::uint8_t>> candidates,
                                    std::size_t per_wheat, bool distinct = false) {
        check_count(per_wheat);
        if (candidates.empty()) {
            throw std::invalid_argument("chaff strategy: decoy_text needs at least one candidate");
        }
        ChaffStrategy s;
        s.kind = Kind::decoy_text;
        s.decoys = std::move(candidates);
        s.chaff_per_wheat = per_wheat;
        s.distinct_serials = distinct;
        return s;
    }

    static ChaffStrategy random_payload(std::size_t per_wheat,
                                        Granularity g = Granularity::byte()) {
        check_count(per_wheat);
        ChaffStrategy s;
        s.kind = Kind::random_payload;
        s.chaff_per_wheat = per_wheat;
        s.granularity = g;
        return s;
    }

private:
    static void check_count(std::size_t per_wheat) {
        if (per_wheat == 0) {
            throw std::invalid_argument("chaff strategy: chaff_per_wheat must be positive");
        }
    }
};

namespace detail {

inline std::uint8_t domain_mask(Granularity g) {
    switch (g.kind) {
        case Granularity::Kind::bit: return 0x01;
        case Granularity::Kind::nibble: return 0x0f;
        default: return 0xff;
    }
}

inline std::vector<std::uint8_t> random_tag(std::size_t bytes, RandomSource& rng) {
    std::vector<std::uint8_t> tag(bytes);
    for (auto& b : tag) b = static_cast<std::uint8_t>(rng.below(256));
    return tag;
}

} // namespace detail

/// Interleave chaff with the wheat pieces. Each wheat packet gets a valid
/// tag; its chaff companions share the serial (Rivest's scheme) and carry
/// uniformly random tags, which collide with a valid tag with probability
/// 2^-tau. With distinct_serials the whole stream is renumbered in
/// transmission order instead, mirroring a serial-per-line listing.
inline std::vector<Packet> chaff_stream(
    const WinnowKey& key,
    const std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>>& wheat,
    const ChaffStrategy& strategy, RandomSource& rng) {
    std::vector<Packet> out;
    std::vector<bool> is_wheat;
    out.reserve(wheat.size() * (1 + strategy.chaff_per_wheat));
    const std::uint8_t mask = detail::domain_mask(strategy.granularity);

    for (const auto& [serial, payload] : wheat) {
        if (payload.size() > kMaxPayload) {
            throw std::length_error("chaff_stream: payload exceeds 65535 bytes");
        }
        const std::size_t group_start = out.size();
        out.push_back({serial, payload, mac_tag(key, serial, payload)});
        is_wheat.push_back(true);
        for (std::size_t c = 0; c < strategy.chaff_per_wheat; ++c) {
            std::vector<std::uint8_t> chaff_payload;
            switch (strategy.kind) {
                case ChaffStrategy::Kind::bit_complement:
                    chaff_payload = payload;
                    for (auto& b : chaff_payload) b = static_cast<std::uint8_t>(~b) & mask;
                    break;
                case ChaffStrategy::Kind::decoy_text:
                    chaff_payload = strategy.decoys[rng.below(strategy.decoys.size())];
                    break;
                case ChaffStrategy::Kind::random_payload:
                    chaff_payload.resize(payload.size());
                    for (auto& b : chaff_payload) {
                        b = static_cast<std::uint8_t>(rng.below(256)) & mask;
                    }
                    break;
            }
            out.push_back({serial, std::move(chaff_payload),
                           detail::random_tag(key.tag_bytes(), rng)});
            is_wheat.push_back(false);
        }
        // shuffle within the group so the wheat position is rng-chosen
        for (std::size_t i = out.size() - group_start; i > 1; --i) {
            const std::size_t j = group_start + rng.below(i);
            std::swap(out[group_start + i - 1], out[j]);
            std::swap(is_wheat[group_start + i - 1], is_wheat[j]);
        }
    }

    if (strategy.distinct_serials) {
        // renumber 1..N in transmission order; wheat tags must match the new serial
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].serial = static_cast<std::uint32_t>(i + 1);
            if (is_wheat[i]) {
                out[i].tag = mac_tag(key, out[i].serial, out[i].payload);
            }
        }
    }
    return out;
}

// ---- winnowing ----

struct WinnowReport {
    std::uint64_t kept = 0;      // packets whose tag validated
    std::uint64_t discarded = 0; // packets whose tag did not
    std::uint64_t gaps = 0;      // serials missing from [1, max kept serial]
    std::uint64_t conflicts = 0; // serials with >= 2 distinct valid payloads
};

struct WinnowResult {
    std::vector<std::uint8_t> message;
    WinnowReport report;
};

/// Keep exactly the packets whose tag recomputes, order by serial, reassemble.
/// All anomalies are reported, never thrown: first valid payload wins a
/// conflicted serial, missing serials count as gaps.
inline WinnowResult winnow(const WinnowKey& key, const std::vector<Packet>& stream,
                           Granularity g = Granularity::byte()) {
    WinnowResult res;
    std::map<std::uint32_t, std::vector<std::uint8_t>> by_serial;
    std::set<std::uint32_t> conflicted;
    for (const Packet& p : stream) {
        if (p.tag != mac_tag(key, p.serial, p.payload)) {
            ++res.report.discarded;
            continue;
        }
        ++res.report.kept;
        const auto it = by_serial.find(p.serial);
        if (it == by_serial.end()) {
            by_serial.emplace(p.serial, p.payload);
        } else if (it->second != p.payload) {
            conflicted.insert(p.serial);
        }
    }
    res.report.conflicts = conflicted.size();
    if (!by_serial.empty()) {
        const std::uint32_t max_serial = by_serial.rbegin()->first;
        res.report.gaps = max_serial - by_serial.size();
    }
    std::vector<std::vector<std::uint8_t>> payloads;
    payloads.reserve(by_serial.size());
    for (auto& [serial, payload] : by_serial) {
        (void)serial;
        payloads.push_back(std::move(payload));
    }
    res.message = join_payloads(payloads, g);
    return res;
}

// ---- wire format (binary, bit-exact) ----
//
// per packet: magic 0x43 0x57, version 0x01, serial (4 bytes BE), payload
// length (2 bytes BE), payload, tag length in bytes (1 byte), tag. A stream
// is a plain concatenation of packets.

inline constexpr std::uint8_t kMagic0 = 0x43; // 'C'
inline constexpr std::uint8_t kMagic1 = 0x57; // 'W'
inline constexpr std::uint8_t kVersion = 0x01;

inline void write_packet(std::ostream& os, const Packet& p) {
    if (p.payload.size() > kMaxPayload) {
        throw std::length_error("write_packet: payload exceeds 65535 bytes");
    }
    const std::array<std::uint8_t, 9> head = {
        kMagic0,
        kMagic1,
        kVersion,
        static_cast<std::uint8_t>(p.serial >> 24),
        static_cast<std::uint8_t>(p.serial >> 16),
        static_cast<std::uint8_t>(p.serial >> 8),
        static_cast<std::uint8_t>(p.serial),
        static_cast<std::uint8_t>(p.payload.size() >> 8),
        static_cast<std::uint8_t>(p.payload.size()),
    };
    os.write(reinterpret_cast<const char*>(head.data()), head.size());
    os.write(reinterpret_cast<const char*>(p.payload.data()),
             static_cast<std::streamsize>(p.payload.size()));
    const std::uint8_t tag_len = static_cast<std::uint8_t>(p.tag.size());
    os.write(reinterpret_cast<const char*>(&tag_len), 1);
    os.write(reinterpret_cast<const char*>(p.tag.data()),
             static_cast<std::streamsize>(p.tag.size()));
}

inline void write_stream(std::ostream& os, const std::vector<Packet>& stream) {
    for (const Packet& p : stream) write_packet(os, p);
}

inline std::vector<Packet> read_stream(std::istream& is) {
    std::vector<Packet> out;
    std::size_t offset = 0;
    auto need = [&](void* dst, std::size_t n, const char* what) {
        is.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is.gcount()) != n) {
            throw std::runtime_error("wire stream: truncated " + std::string(what) +
                                     " at byte " + std::to_string(offset));
        }
        offset += n;
    };
    std::size_t expected_tag_len = 0;
    for (;;) {
        std::uint8_t first = 0;
        is.read(reinterpret_cast<char*>(&first), 1);
        if (is.gcount() == 0) break; // clean end of stream
        offset += 1;
        std::array<std::uint8_t, 8> head{};
        need(head.data(), head.size(), "packet header");
        if (first != kMagic0 || head[0] != kMagic1) {
            throw std::runtime_error("wire stream: bad magic at byte " +
                                     std::to_string(offset - 9));
        }
        if (head[1] != kVersion) {
            throw std::runtime_error("wire stream: unsupported version " +
                                     std::to_string(head[1]));
        }
        Packet p;
        p.serial = (static_cast<std::uint32_t>(head[2]) << 24) |
                   (static_cast<std::uint32_t>(head[3]) << 16) |
                   (static_cast<std::uint32_t>(head[4]) << 8) | head[5];
        const std::size_t payload_len =
            (static_cast<std::size_t>(head[6]) << 8) | head[7];
        p.payload.resize(payload_len);
        if (payload_len > 0) need(p.payload.data(), payload_len, "payload");
        std::uint8_t tag_len = 0;
        need(&tag_len, 1, "tag length");
        bool tag_ok = false;
        for (int t : kAllowedTagBits) {
            if (static_cast<std::size_t>(t) / 8 == tag_len) tag_ok = true;
        }
        if (!tag_ok) {
            throw std::runtime_error("wire stream: tag length " + std::to_string(tag_len) +
                                     " bytes is not a supported tau");
        }
        if (expected_tag_len == 0) {
            expected_tag_len = tag_len;
        } else if (expected_tag_len != tag_len) {
            throw std::runtime_error("wire stream: mixed tag lengths within one stream");
        }
        p.tag.resize(tag_len);
        need(p.tag.data(), tag_len, "tag");
        out.push_back(std::move(p));
    }
    return out;
}

// ---- key file format ----
//
//   winnow v1
//   secret=<64 hex digits>
//   tau=<int>

inline void write_key(std::ostream& os, const WinnowKey& key) {
    static constexpr char kDigits[] = "0123456789abcdef";
    os << "winnow v1\nsecret=";
    for (std::uint8_t b : key.secret) {
        os << kDigits[b >> 4] << kDigits[b & 0x0f];
    }
    os << "\ntau=" << key.tag_bits << "\n";
}

inline std::string key_to_string(const WinnowKey& key) {
    std::ostringstream os;
    write_key(os, key);
    return os.str();
}

inline WinnowKey read_key(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "winnow v1") {
        throw std::runtime_error("winnow key: expected header 'winnow v1'");
    }
    if (!std::getline(is, line) || line.rfind("secret=", 0) != 0 ||
        line.size() != 7 + 2 * kSecretBytes) {
        throw std::runtime_error("winnow key: expected 'secret=<64 hex digits>'");
    }
    std::array<std::uint8_t, kSecretBytes> secret{};
    for (std::size_t i = 0; i < kSecretBytes; ++i) {
        const auto hex_val = [&](char c) -> unsigned {
            if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a') + 10;
            if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A') + 10;
            throw std::runtime_error("winnow key: invalid hex digit in secret");
        };
        secret[i] = static_cast<std::uint8_t>((hex_val(line[7 + 2 * i]) << 4) |
                                              hex_val(line[7 + 2 * i + 1]));
    }
    if (!std::getline(is, line) || line.rfind("tau=", 0) != 0) {
        throw std::runtime_error("winnow key: expected 'tau=<int>'");
    }
    int tau = 0;
    try {
        tau = std::stoi(line.substr(4));
    } catch (const std::exception&) {
        throw std::runtime_error("winnow key: bad integer in 'tau='");
    }
    try {
        return WinnowKey(secret, tau);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(e.what());
    }
}

inline WinnowKey key_from_string(std::string_view text) {
    std::istringstream is{std::string(text)};
    return read_key(is);
}

/// Fresh random key.
inline WinnowKey random_key(int tau, RandomSource& rng) {
    std::array<std::uint8_t, kSecretBytes> secret{};
    for (auto& b : secret) b = static_cast<std::uint8_t>(rng.below(256));
    return WinnowKey(secret, tau);
}

} // namespace decoykit::winnow
