#pragma once

#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decoykit/bitstring.hpp"

// BitFlip: a polyalphabetic substitution cipher keyed by per-letter bit
// strings s_i and Hamming radii h_i. A token t carries letter i exactly when
// hamming(s_i, t) == h_i and no other letter's radius matches (one-to-many
// encoding, many-to-one decoding). Tokens matching zero or several letters
// are chaff: the receiver discards them, the eavesdropper cannot.
namespace decoykit::bitflip {

// Exhaustive transmitter/chaff enumeration is limited to this token length;
// beyond it encoding falls back to rejection sampling from the letter sphere.
inline constexpr int kMaxScanBits = 20;

// Symbols handed out by generators, in order.
inline constexpr std::string_view kSymbolTable =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    "!#$%&'()*+,-./:;<=>?@[]^_`{|}~";

struct Letter {
    char symbol;
    BitString s;
    int h;
};

/// A validated-on-construction BitFlip key: n letters over l-bit tokens.
/// Construction enforces the structural rules (distinct strings, unique
/// printable symbols, radii in range); semantic validity (every letter has
/// at least one unambiguous transmitter) is what validate() reports.
class Alphabet {
public:
    Alphabet(int token_length, std::vector<Letter> letters)
        : l_(token_length), letters_(std::move(letters)) {
        std::vector<std::string> errors;
        collect_structural_errors(l_, letters_, errors);
        if (!errors.empty()) {
            throw std::invalid_argument("bitflip alphabet: " + errors.front());
        }
    }

    /// Non-throwing construction; structural problems land in `errors`.
    static std::optional<Alphabet> try_make(int token_length, std::vector<Letter> letters,
                                            std::vector<std::string>& errors) {
        collect_structural_errors(token_length, letters, errors);
        if (!errors.empty()) return std::nullopt;
        return Alphabet(token_length, std::move(letters));
    }

    int token_length() const { return l_; }
    std::size_t size() const { return letters_.size(); }
    const std::vector<Letter>& letters() const { return letters_; }
    const Letter& letter(std::size_t i) const { return letters_.at(i); }

    std::optional<std::size_t> index_of(char symbol) const {
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            if (letters_[i].symbol == symbol) return i;
        }
        return std::nullopt;
    }

private:
    static void collect_structural_errors(int l, const std::vector<Letter>& letters,
                                          std::vector<std::string>& errors) {
        if (l < 1 || static_cast<std::size_t>(l) > kMaxBits) {
            errors.push_back("token length " + std::to_string(l) + " out of range [1, " +
                             std::to_string(kMaxBits) + "]");
            return;
        }
        if (letters.empty()) {
            errors.push_back("alphabet has no letters");
            return;
        }
        for (std::size_t i = 0; i < letters.size(); ++i) {
            const Letter& e = letters[i];
            const std::string who = "letter '" + std::string(1, e.symbol) + "'";
            if (e.symbol <= ' ' || e.symbol > '~') {
                errors.push_back("letter " + std::to_string(i) +
                                 " has a non-printable or blank symbol");
            }
            if (e.s.size() != static_cast<std::size_t>(l)) {
                errors.push_back(who + " string has length " + std::to_string(e.s.size()) +
                                 ", expected " + std::to_string(l));
            }
            if (e.h < 0 || e.h > l) {
                errors.push_back(who + " radius " + std::to_string(e.h) + " out of [0, " +
                                 std::to_string(l) + "]");
            }
            for (std::size_t j = i + 1; j < letters.size(); ++j) {
                if (letters[j].symbol == e.symbol) {
                    errors.push_back("duplicate symbol '" + std::string(1, e.symbol) + "'");
                }
                if (letters[j].s == e.s) {
                    errors.push_back("duplicate letter string between letters " +
                                     std::to_string(i) + " and " + std::to_string(j));
                }
            }
        }
    }

    int l_;
    std::vector<Letter> letters_;
};

struct DecodeOutcome {
    enum class Kind { letter, chaff_none, chaff_ambiguous };

    Kind kind;
    std::size_t letter = 0;   // meaningful only when kind == letter
    std::size_t matches = 0;  // 1 for letter, 0 for chaff_none, >= 2 for chaff_ambiguous

    bool is_letter() const { return kind == Kind::letter; }
    bool is_chaff() const { return kind != Kind::letter; }
};

struct ValidationReport {
    std::vector<std::uint64_t> transmitter_counts; // tokens decoding uniquely to each letter
    std::uint64_t chaff_none = 0;                  // tokens matching no letter
    std::uint64_t chaff_ambiguous = 0;             // tokens matching two or more letters
    bool valid = false;                            // every transmitter count >= 1

    std::uint64_t chaff_size() const { return chaff_none + chaff_ambiguous; }
};

namespace detail {

inline void require_scan(const Alphabet& a, const char* op) {
    if (a.token_length() > kMaxScanBits) {
        throw std::invalid_argument(std::string(op) + ": exhaustive enumeration requires l <= " +
                                    std::to_string(kMaxScanBits));
    }
}

// letter strings as integers, for fast scanning of all 2^l tokens
inline std::vector<std::uint64_t> letter_values(const Alphabet& a) {
    std::vector<std::uint64_t> vs;
    vs.reserve(a.size());
    for (const Letter& e : a.letters()) vs.push_back(e.s.to_uint());
    return vs;
}

inline std::size_t match_count(const Alphabet& a, const std::vector<std::uint64_t>& vs,
                               std::uint64_t token, std::size_t* matched) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < vs.size(); ++k) {
        if (std::popcount(token ^ vs[k]) == a.letter(k).h) {
            ++count;
            *matched = k;
        }
    }
    return count;
}

} // namespace detail

/// Exhaustive per-letter transmitter counts and chaff accounting over all
/// 2^l tokens. The alphabet is semantically valid iff every letter has at
/// least one transmitter.
inline ValidationReport validate(const Alphabet& a) {
    detail::require_scan(a, "validate");
    const auto vs = detail::letter_values(a);
    ValidationReport rep;
    rep.transmitter_counts.assign(a.size(), 0);
    const std::uint64_t total = std::uint64_t{1} << a.token_length();
    for (std::uint64_t t = 0; t < total; ++t) {
        std::size_t which = 0;
        const std::size_t m = detail::match_count(a, vs, t, &which);
        if (m == 1) {
            ++rep.transmitter_counts[which];
        } else if (m == 0) {
            ++rep.chaff_none;
        } else {
            ++rep.chaff_ambiguous;
        }
    }
    rep.valid = true;
    for (std::uint64_t c : rep.transmitter_counts) {
        if (c == 0) rep.valid = false;
    }
    return rep;
}

/// All tokens that decode unambiguously to letter i, in lexicographic order.
inline std::vector<BitString> transmitters(const Alphabet& a, std::size_t i) {
    if (i >= a.size()) {
        throw std::out_of_range("transmitters: letter index " + std::to_string(i) +
                                " out of range");
    }
    detail::require_scan(a, "transmitters");
    const auto vs = detail::letter_values(a);
    std::vector<BitString> out;
    const std::uint64_t total = std::uint64_t{1} << a.token_length();
    for (std::uint64_t t = 0; t < total; ++t) {
        std::size_t which = 0;
        if (detail::match_count(a, vs, t, &which) == 1 && which == i) {
            out.push_back(BitString::from_uint(t, static_cast<std::size_t>(a.token_length())));
        }
    }
    return out;
}

/// Match-set decoding: Letter iff exactly one radius matches, chaff otherwise.
inline DecodeOutcome decode_token(const Alphabet& a, const BitString& token) {
    if (token.size() != static_cast<std::size_t>(a.token_length())) {
        throw std::invalid_argument("decode_token: token length " + std::to_string(token.size()) +
                                    " does not match alphabet l=" +
                                    std::to_string(a.token_length()));
    }
    std::size_t count = 0;
    std::size_t which = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (hamming(a.letter(k).s, token) == static_cast<std::size_t>(a.letter(k).h)) {
            ++count;
            which = k;
        }
    }
    if (count == 1) return {DecodeOutcome::Kind::letter, which, 1};
    if (count == 0) return {DecodeOutcome::Kind::chaff_none, 0, 0};
    return {DecodeOutcome::Kind::chaff_ambiguous, 0, count};
}

/// Uniform draw from transmitters(a, i). For l beyond the scan limit this
/// rejection-samples the letter sphere and keeps only unambiguous tokens,
/// which is the same distribution.
inline BitString encode_letter(const Alphabet& a, std::size_t i, RandomSource& rng) {
    if (i >= a.size()) {
        throw std::out_of_range("encode_letter: letter index " + std::to_string(i) +
                                " out of range");
    }
    const Letter& e = a.letter(i);
    if (a.token_length() <= kMaxScanBits) {
        const auto tx = transmitters(a, i);
        if (tx.empty()) {
            throw std::runtime_error("encode_letter: letter '" + std::string(1, e.symbol) +
                                     "' has no unambiguous transmitter (alphabet invalid)");
        }
        return tx[rng.below(tx.size())];
    }
    constexpr int kAttempts = 1000000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        BitString t = random_sphere_point(e.s, static_cast<std::size_t>(e.h), rng);
        if (decode_token(a, t).is_letter()) return t; // unique match must be i: it is in i's sphere
    }
    throw std::runtime_error("encode_letter: sampling found no unambiguous transmitter for '" +
                             std::string(1, e.symbol) + "'");
}

/// Uniform draw from the chaff set (tokens decoding to no letter or to
/// several). Errors if the alphabet covers every token unambiguously.
inline BitString chaff_token(const Alphabet& a, RandomSource& rng) {
    const std::size_t l = static_cast<std::size_t>(a.token_length());
    if (a.token_length() <= kMaxScanBits) {
        const auto vs = detail::letter_values(a);
        std::vector<std::uint64_t> chaff;
        const std::uint64_t total = std::uint64_t{1} << a.token_length();
        for (std::uint64_t t = 0; t < total; ++t) {
            std::size_t which = 0;
            if (detail::match_count(a, vs, t, &which) != 1) chaff.push_back(t);
        }
        if (chaff.empty()) {
            throw std::runtime_error("chaff_token: alphabet leaves no chaff tokens");
        }
        return BitString::from_uint(chaff[rng.below(chaff.size())], l);
    }
    constexpr int kAttempts = 1000000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        BitString t = random_bits(l, rng);
        if (decode_token(a, t).is_chaff()) return t;
    }
    throw std::runtime_error("chaff_token: sampling found no chaff token");
}

enum class EncodeMode {
    randomized, // uniform transmitter per letter: the cipher proper
    degenerate, // always the lexicographically smallest transmitter: a
                // deliberately weak baseline for the analysis harness
};

/// Encode a message as a token stream. Each output position is chaff with
/// independent probability chaff_rate; wheat tokens keep message order.
inline std::vector<BitString> encode_message(const Alphabet& a, std::string_view msg,
                                             double chaff_rate, EncodeMode mode,
                                             RandomSource& rng) {
    if (!(chaff_rate >= 0.0 && chaff_rate < 1.0)) {
        throw std::invalid_argument("encode_message: chaff_rate must be in [0, 1)");
    }
    std::vector<std::size_t> indices;
    indices.reserve(msg.size());
    for (std::size_t p = 0; p < msg.size(); ++p) {
        const auto idx = a.index_of(msg[p]);
        if (!idx) {
            throw std::invalid_argument("encode_message: symbol '" + std::string(1, msg[p]) +
                                        "' at position " + std::to_string(p) +
                                        " is not in the alphabet");
        }
        indices.push_back(*idx);
    }

    // per-letter transmitter cache (scan range only; sampling otherwise)
    const bool scan = a.token_length() <= kMaxScanBits;
    std::vector<std::vector<BitString>> tx_cache(a.size());
    if (scan) {
        for (std::size_t i : indices) {
            if (tx_cache[i].empty()) {
                tx_cache[i] = transmitters(a, i);
                if (tx_cache[i].empty()) {
                    throw std::runtime_error("encode_message: letter '" +
                                             std::string(1, a.letter(i).symbol) +
                                             "' has no transmitter (alphabet invalid)");
                }
            }
        }
    } else if (mode == EncodeMode::degenerate) {
        throw std::invalid_argument("encode_message: degenerate mode requires l <= " +
                                    std::to_string(kMaxScanBits));
    }

    std::vector<BitString> out;
    out.reserve(indices.size());
    std::size_t next = 0;
    while (next < indices.size()) {
        if (chaff_rate > 0.0 && rng.chance(chaff_rate)) {
            out.push_back(chaff_token(a, rng));
            continue;
        }
        const std::size_t i = indices[next++];
        if (mode == EncodeMode::degenerate) {
            out.push_back(tx_cache[i].front()); // scan order is lexicographic
        } else if (scan) {
            out.push_back(tx_cache[i][rng.below(tx_cache[i].size())]);
        } else {
            out.push_back(encode_letter(a, i, rng));
        }
    }
    return out;
}

struct DecodeResult {
    std::string text;
    std::size_t kept = 0;
    std::size_t discarded = 0;
};

/// Winnow a token stream: keep letters in order, silently drop chaff.
inline DecodeResult decode_stream(const Alphabet& a, const std::vector<BitString>& tokens) {
    DecodeResult res;
    for (std::size_t p = 0; p < tokens.size(); ++p) {
        if (tokens[p].size() != static_cast<std::size_t>(a.token_length())) {
            throw std::invalid_argument("decode_stream: token at position " + std::to_string(p) +
                                        " has length " + std::to_string(tokens[p].size()) +
                                        ", expected " + std::to_string(a.token_length()));
        }
        const DecodeOutcome out = decode_token(a, tokens[p]);
        if (out.is_letter()) {
            res.text.push_back(a.letter(out.letter).symbol);
            ++res.kept;
        } else {
            ++res.discarded;
        }
    }
    return res;
}

/// Structurally well-formed alphabet with uniform random letter strings and
/// radii; no validity guarantee.
inline Alphabet random_alphabet(int n, int l, RandomSource& rng) {
    if (n < 1 || static_cast<std::size_t>(n) > kSymbolTable.size()) {
        throw std::invalid_argument("random_alphabet: letter count out of range");
    }
    if (l < 1 || (l < 63 && (std::uint64_t{1} << l) < static_cast<std::uint64_t>(n))) {
        throw std::invalid_argument("random_alphabet: 2^l too small for " + std::to_string(n) +
                                    " distinct letters");
    }
    std::vector<Letter> letters;
    letters.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (;;) {
            BitString s = random_bits(static_cast<std::size_t>(l), rng);
            bool dup = false;
            for (const Letter& e : letters) {
                if (e.s == s) dup = true;
            }
            if (dup) continue;
            letters.push_back({kSymbolTable[static_cast<std::size_t>(i)], std::move(s),
                               static_cast<int>(rng.below(static_cast<std::uint64_t>(l) + 1))});
            break;
        }
    }
    return Alphabet(l, std::move(letters));
}

/// Rejection sampling over random_alphabet until validate() passes; this is
/// the uniform-over-valid-alphabets oracle used for baselines.
inline Alphabet random_valid_alphabet(int n, int l, RandomSource& rng,
                                      int max_attempts = 100000) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Alphabet a = random_alphabet(n, l, rng);
        if (validate(a).valid) return a;
    }
    throw std::runtime_error("random_valid_alphabet: no valid alphabet in " +
                             std::to_string(max_attempts) + " attempts");
}

// ---- key file format (text, line-oriented, bit-exact) ----
//
//   bitflip v1
//   l=<integer>
//   letter <symbol> s=<hex> h=<integer>

inline void write_key(std::ostream& os, const Alphabet& a) {
    os << "bitflip v1\n";
    os << "l=" << a.token_length() << "\n";
    for (const Letter& e : a.letters()) {
        os << "letter " << e.symbol << " s=" << to_hex(e.s) << " h=" << e.h << "\n";
    }
}

inline std::string key_to_string(const Alphabet& a) {
    std::ostringstream os;
    write_key(os, a);
    return os.str();
}

inline Alphabet read_key(std::istream& is) {
    auto fail = [](std::size_t line, const std::string& why) -> std::runtime_error {
        return std::runtime_error("bitflip key: line " + std::to_string(line) + ": " + why);
    };
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line) || line != "bitflip v1") {
        throw fail(1, "expected header 'bitflip v1'");
    }
    ++lineno;
    if (!std::getline(is, line) || line.rfind("l=", 0) != 0) {
        throw fail(2, "expected 'l=<integer>'");
    }
    int l = 0;
    try {
        l = std::stoi(line.substr(2));
    } catch (const std::exception&) {
        throw fail(2, "bad integer in 'l='");
    }
    std::vector<Letter> letters;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kw, sym, sfield, hfield;
        if (!(ls >> kw >> sym >> sfield >> hfield) || kw != "letter" || sym.size() != 1 ||
            sfield.rfind("s=", 0) != 0 || hfield.rfind("h=", 0) != 0) {
            throw fail(lineno, "expected 'letter <symbol> s=<hex> h=<integer>'");
        }
        int h = 0;
        try {
            h = std::stoi(hfield.substr(2));
        } catch (const std::exception&) {
            throw fail(lineno, "bad integer in 'h='");
        }
        BitString s;
        try {
            s = from_hex(sfield.substr(2), static_cast<std::size_t>(l));
        } catch (const std::exception& e) {
            throw fail(lineno, e.what());
        }
        letters.push_back({sym[0], std::move(s), h});
    }
    std::vector<std::string> errors;
    auto a = Alphabet::try_make(l, std::move(letters), errors);
    if (!a) {
        throw std::runtime_error("bitflip key: " + errors.front());
    }
    return *std::move(a);
}

inline Alphabet key_from_string(std::string_view text) {
    std::istringstream is{std::string(text)};
    return read_key(is);
}

// Token stream file: one lowercase hex token per line.

inline void write_tokens(std::ostream& os, const std::vector<BitString>& tokens) {
    for (const auto& t : tokens) os << to_hex(t) << "\n";
}

inline std::vector<BitString> read_tokens(std::istream& is, int token_length) {
    std::vector<BitString> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(from_hex(line, static_cast<std::size_t>(token_length)));
        } catch (const std::exception& e) {
            throw std::runtime_error("token stream: line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
    }
    return out;
}

} // namespace decoykit::bitflip
