#pragma once

#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decoykit {

// Cap on the length of a single cipher token (enforced where alphabets are
// built). BitString itself stays unbounded: one-time pads and test samples
// are arbitrarily long bit strings.
inline constexpr std::size_t kMaxBits = 4096;

/// Uniform random bits, either seeded (reproducible across runs) or drawn
/// from system entropy. Every randomized operation in the toolkit takes one
/// of these explicitly; there is no hidden global generator.
class RandomSource {
public:
    /// System-entropy source.
    RandomSource() : engine_(entropy_seed()), seeded_(false) {}

    /// Seeded-deterministic source: identical seeds give identical streams.
    explicit RandomSource(std::uint64_t seed) : engine_(seed), seeded_(true) {}

    bool seeded() const { return seeded_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). Rejection-sampled so the result does
    /// not depend on the standard library's distribution internals.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("RandomSource::below: bound must be positive");
        }
        const std::uint64_t threshold = (std::uint64_t{0} - bound) % bound; // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// True with probability p.
    bool chance(double p) { return unit() < p; }

private:
    static std::uint64_t entropy_seed() {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }

    std::mt19937_64 engine_;
    bool seeded_;
};

/// Fixed-length sequence of bits; the universal carrier for letters,
/// transmitters, keys and pads. Index 0 is the most significant (leftmost)
/// bit in every textual rendering. Immutable in spirit: operations that
/// "modify" are only used while building a value.
class BitString {
public:
    BitString() = default;

    /// All-zero string of the given length.
    explicit BitString(std::size_t length) : len_(length), words_(word_count(length), 0) {}

    /// Parse a string of '0'/'1' characters, index 0 leftmost.
    static BitString from_string(std::string_view bits) {
        BitString out(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1') {
                out.set(i, true);
            } else if (bits[i] != '0') {
                throw std::invalid_argument("BitString::from_string: invalid character at index " +
                                            std::to_string(i));
            }
        }
        return out;
    }

    /// Interpret the low `length` bits of `value` big-endian: bit 0 of the
    /// result is the most significant of those bits. Requires length <= 64
    /// and no set bits above `length`.
    static BitString from_uint(std::uint64_t value, std::size_t length) {
        if (length > 64) {
            throw std::invalid_argument("BitString::from_uint: length must be <= 64");
        }
        if (length < 64 && (value >> length) != 0) {
            throw std::overflow_error("BitString::from_uint: value does not fit in " +
                                      std::to_string(length) + " bits");
        }
        BitString out(length);
        for (std::size_t i = 0; i < length; ++i) {
            out.set(i, (value >> (length - 1 - i)) & 1u);
        }
        return out;
    }

    /// Bytes in order, each byte MSB-first, matching the bit-0-is-MSB rule.
    static BitString from_bytes(const std::vector<std::uint8_t>& bytes) {
        BitString out(bytes.size() * 8);
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            for (int b = 0; b < 8; ++b) {
                out.set(i * 8 + b, (bytes[i] >> (7 - b)) & 1u);
            }
        }
        return out;
    }

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool get(std::size_t i) const {
        check_index(i);
        return (words_[i / 64] >> (63 - (i % 64))) & 1u;
    }

    void set(std::size_t i, bool v) {
        check_index(i);
        const std::uint64_t mask = std::uint64_t{1} << (63 - (i % 64));
        if (v) {
            words_[i / 64] |= mask;
        } else {
            words_[i / 64] &= ~mask;
        }
    }

    void flip(std::size_t i) {
        check_index(i);
        words_[i / 64] ^= std::uint64_t{1} << (63 - (i % 64));
    }

    BitString flipped(std::size_t i) const {
        BitString out = *this;
        out.flip(i);
        return out;
    }

    std::size_t popcount() const {
        std::size_t n = 0;
        for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    /// Value of the whole string as a big-endian integer; length <= 64.
    std::uint64_t to_uint() const {
        if (len_ > 64) {
            throw std::overflow_error("BitString::to_uint: length exceeds 64 bits");
        }
        if (len_ == 0) return 0;
        return words_[0] >> (64 - len_);
    }

    /// Byte i, i.e. bits [8i, 8i+8). Requires 8i+8 <= size().
    std::uint8_t byte_at(std::size_t i) const {
        if (8 * i + 8 > len_) {
            throw std::out_of_range("BitString::byte_at: byte " + std::to_string(i) +
                                    " out of range");
        }
        std::uint8_t b = 0;
        for (int k = 0; k < 8; ++k) b = static_cast<std::uint8_t>((b << 1) | get(8 * i + k));
        return b;
    }

    /// Whole string as bytes; length must be a multiple of 8.
    std::vector<std::uint8_t> to_bytes() const {
        if (len_ % 8 != 0) {
            throw std::invalid_argument("BitString::to_bytes: length not a multiple of 8");
        }
        std::vector<std::uint8_t> out(len_ / 8);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = byte_at(i);
        return out;
    }

    std::string to_string() const {
        std::string out(len_, '0');
        for (std::size_t i = 0; i < len_; ++i) {
            if (get(i)) out[i] = '1';
        }
        return out;
    }

    friend bool operator==(const BitString& a, const BitString& b) {
        return a.len_ == b.len_ && a.words_ == b.words_;
    }
    friend bool operator!=(const BitString& a, const BitString& b) { return !(a == b); }

    /// Total order: lexicographic on bits for equal lengths (the only case
    /// with cipher meaning), content-then-length otherwise. Trailing bits
    /// of the last word are always zero, so word compare is bit compare.
    friend bool operator<(const BitString& a, const BitString& b) {
        const std::size_t n = std::min(a.words_.size(), b.words_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.words_[i] != b.words_[i]) return a.words_[i] < b.words_[i];
        }
        return a.len_ < b.len_;
    }

private:
    static std::size_t word_count(std::size_t length) { return (length + 63) / 64; }

    void check_index(std::size_t i) const {
        if (i >= len_) {
            throw std::out_of_range("BitString: index " + std::to_string(i) +
                                    " out of range for length " + std::to_string(len_));
        }
    }

    friend std::size_t hamming(const BitString&, const BitString&);

    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Number of positions where a and b differ. Lengths must match.
inline std::size_t hamming(const BitString& a, const BitString& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("hamming: length mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
        d += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
    }
    return d;
}

/// Lowercase hex, most-significant-first, ceil(size/4) digits. The empty
/// string renders as "".
inline std::string to_hex(const BitString& b) {
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t ndig = (b.size() + 3) / 4;
    std::string out;
    out.reserve(ndig);
    unsigned nibble = 0;
    std::size_t filled = ndig * 4 - b.size(); // implicit leading zero bits
    for (std::size_t i = 0; i < b.size(); ++i) {
        nibble = (nibble << 1) | static_cast<unsigned>(b.get(i));
        if (++filled % 4 == 0) {
            out.push_back(kDigits[nibble]);
            nibble = 0;
        }
    }
    return out;
}

/// Inverse of to_hex for a known target length. Accepts extra leading hex
/// digits as long as the encoded value fits in `length` bits.
inline BitString from_hex(std::string_view hex, std::size_t length) {
    if (length > 4 * hex.size()) {
        throw std::invalid_argument("from_hex: length " + std::to_string(length) +
                                    " exceeds 4 x " + std::to_string(hex.size()) + " digits");
    }
    BitString out(length);
    const std::size_t total = 4 * hex.size();
    const std::size_t lead = total - length;
    for (std::size_t d = 0; d < hex.size(); ++d) {
        const char c = hex[d];
        unsigned v;
        if (c >= '0' && c <= '9') {
            v = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v = static_cast<unsigned>(c - 'a') + 10;
        } else if (c >= 'A' && c <= 'F') {
            v = static_cast<unsigned>(c - 'A') + 10;
        } else {
            throw std::invalid_argument("from_hex: invalid digit '" + std::string(1, c) +
                                        "' at index " + std::to_string(d));
        }
        for (int k = 0; k < 4; ++k) {
            const bool bit = (v >> (3 - k)) & 1u;
            const std::size_t pos = 4 * d + static_cast<std::size_t>(k);
            if (pos < lead) {
                if (bit) {
                    throw std::overflow_error("from_hex: value does not fit in " +
                                              std::to_string(length) + " bits");
                }
            } else {
                out.set(pos - lead, bit);
            }
        }
    }
    return out;
}

/// Fresh uniform string of the given length.
inline BitString random_bits(std::size_t length, RandomSource& rng) {
    BitString out(length);
    for (std::size_t i = 0; i < length; i += 64) {
        const std::uint64_t w = rng.next_u64();
        const std::size_t n = std::min<std::size_t>(64, length - i);
        for (std::size_t k = 0; k < n; ++k) {
            out.set(i + k, (w >> (63 - k)) & 1u);
        }
    }
    return out;
}

/// C(n, k), saturating at 2^63 - 1 (plenty for enumeration guards).
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    constexpr std::uint64_t cap = (std::uint64_t{1} << 63) - 1;
    unsigned __int128 acc = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > cap) return cap;
    }
    return static_cast<std::uint64_t>(acc);
}

// Enumeration above this many elements is refused rather than exhausting
// memory; callers needing single samples use random_sphere_point instead.
inline constexpr std::uint64_t kMaxSphereEnum = std::uint64_t{1} << 24;

/// All strings at exactly `radius` flips from `center`, in lexicographic
/// order of flipped positions. Exactly C(length, radius) elements.
inline std::vector<BitString> sphere(const BitString& center, std::size_t radius) {
    const std::size_t l = center.size();
    if (radius > l) {
        throw std::out_of_range("sphere: radius " + std::to_string(radius) +
                                " exceeds length " + std::to_string(l));
    }
    const std::uint64_t n = binomial(l, radius);
    if (n > kMaxSphereEnum) {
        throw std::length_error("sphere: C(" + std::to_string(l) + "," + std::to_string(radius) +
                                ") is too large to enumerate");
    }
    std::vector<BitString> out;
    out.reserve(static_cast<std::size_t>(n));
    if (radius == 0) {
        out.push_back(center);
        return out;
    }
    std::vector<std::size_t> idx(radius);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (;;) {
        BitString t = center;
        for (std::size_t i : idx) t.flip(i);
        out.push_back(std::move(t));
        // next combination of flip positions
        std::size_t j = radius;
        while (j > 0 && idx[j - 1] == l - radius + (j - 1)) --j;
        if (j == 0) break;
        ++idx[j - 1];
        for (std::size_t k = j; k < radius; ++k) idx[k] = idx[k - 1] + 1;
    }
    return out;
}

/// Uniform sample from sphere(center, radius) without enumerating it.
inline BitString random_sphere_point(const BitString& center, std::size_t radius,
                                     RandomSource& rng) {
    const std::size_t l = center.size();
    if (radius > l) {
        throw std::out_of_range("random_sphere_point: radius " + std::to_string(radius) +
                                " exceeds length " + std::to_string(l));
    }
    // partial Fisher-Yates: the first `radius` entries are a uniform
    // combination of distinct positions
    std::vector<std::size_t> pos(l);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    BitString out = center;
    for (std::size_t i = 0; i < radius; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(l - i));
        std::swap(pos[i], pos[j]);
        out.flip(pos[i]);
    }
    return out;
}

} // namespace decoykit
