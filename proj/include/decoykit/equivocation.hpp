#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "decoykit/bitflip.hpp"
#include "decoykit/bitstring.hpp"
#include "decoykit/evolve.hpp"

// One-time-pad equivocation made operational. A ciphertext under an OTP is
// consistent with every equal-length plaintext: forging the key that
// "decrypts" it to any chosen decoy is one XOR. Terminal lists bundle such
// forged keys for a whole candidate list, and mimics pad an a-priori list
// with near-miss texts. A desk-scale search does the analogous forgery for
// BitFlip alphabets.
namespace decoykit::equivocation {

struct Pad {
    enum class Origin { generated, forged };

    BitString bits;
    Origin origin = Origin::generated;
};

/// Fresh random pad of the given bit length.
inline Pad generate_pad(std::size_t bit_length, RandomSource& rng) {
    if (bit_length == 0) throw std::invalid_argument("generate_pad: length must be positive");
    return {random_bits(bit_length, rng), Pad::Origin::generated};
}

namespace detail {

inline std::vector<std::uint8_t> xor_with_pad(const std::vector<std::uint8_t>& data,
                                              const Pad& pad, const char* op) {
    if (pad.bits.size() < 8 * data.size()) {
        throw std::invalid_argument(std::string(op) + ": pad has " +
                                    std::to_string(pad.bits.size()) + " bits, need " +
                                    std::to_string(8 * data.size()));
    }
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        out[i] = data[i] ^ pad.bits.byte_at(i);
    }
    return out;
}

} // namespace detail

/// XOR with the leading bytes of the pad. Encrypt and decrypt are the same
/// involution; both names exist for call-site clarity.
inline std::vector<std::uint8_t> otp_encrypt(const std::vector<std::uint8_t>& plaintext,
                                             const Pad& pad) {
    return detail::xor_with_pad(plaintext, pad, "otp_encrypt");
}

inline std::vector<std::uint8_t> otp_decrypt(const std::vector<std::uint8_t>& ciphertext,
                                             const Pad& pad) {
    return detail::xor_with_pad(ciphertext, pad, "otp_decrypt");
}

/// The pad that makes `ciphertext` decrypt to `decoy`: c XOR decoy. Always
/// exists for equal lengths; that is the whole point of the one-time pad.
inline Pad forge_key(const std::vector<std::uint8_t>& ciphertext,
                     const std::vector<std::uint8_t>& decoy) {
    if (ciphertext.size() != decoy.size()) {
        throw std::invalid_argument("forge_key: ciphertext has " +
                                    std::to_string(ciphertext.size()) + " bytes, decoy " +
                                    std::to_string(decoy.size()));
    }
    std::vector<std::uint8_t> k(ciphertext.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = ciphertext[i] ^ decoy[i];
    return {BitString::from_bytes(k), Pad::Origin::forged};
}

struct TerminalEntry {
    std::vector<std::uint8_t> candidate;
    Pad key;
    std::optional<double> weight;
    bool verified = false;
};

struct TerminalList {
    std::vector<TerminalEntry> entries;
};

/// One forged key per candidate, each re-checked by actually decrypting the
/// ciphertext with it. Weights are optional and, when given, must be a
/// probability distribution over the candidates.
inline TerminalList build_terminal_list(const std::vector<std::uint8_t>& ciphertext,
                                        const std::vector<std::vector<std::uint8_t>>& candidates,
                                        const std::vector<double>& weights = {}) {
    if (!weights.empty()) {
        if (weights.size() != candidates.size()) {
            throw std::invalid_argument("terminal list: " + std::to_string(weights.size()) +
                                        " weights for " + std::to_string(candidates.size()) +
                                        " candidates");
        }
        double sum = 0;
        for (double w : weights) {
            if (w < 0) throw std::invalid_argument("terminal list: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("terminal list: weights sum to " + std::to_string(sum) +
                                        ", expected 1");
        }
    }
    TerminalList out;
    out.entries.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].size() != ciphertext.size()) {
            throw std::invalid_argument("terminal list: candidate " + std::to_string(i) +
                                        " has " + std::to_string(candidates[i].size()) +
                                        " bytes, ciphertext " +
                                        std::to_string(ciphertext.size()));
        }
        TerminalEntry e;
        e.candidate = candidates[i];
        e.key = forge_key(ciphertext, candidates[i]);
        if (!weights.empty()) e.weight = weights[i];
        e.verified = otp_decrypt(ciphertext, e.key) == e.candidate;
        out.entries.push_back(std::move(e));
    }
    return out;
}

/// Keep only entries at or above the weight threshold (candidate pruning).
inline TerminalList prune_terminal_list(const TerminalList& list, double threshold) {
    TerminalList out;
    for (const auto& e : list.entries) {
        if (!e.weight || *e.weight >= threshold) out.entries.push_back(e);
    }
    return out;
}

/// Text report, one line per entry.
inline void write_terminal_list(std::ostream& os, const TerminalList& list) {
    for (const auto& e : list.entries) {
        os << "candidate=\"" << std::string(e.candidate.begin(), e.candidate.end()) << "\""
           << " key=" << to_hex(e.key.bits);
        os << " weight=";
        if (e.weight) {
            os << *e.weight;
        } else {
            os << "none";
        }
        os << " verified=" << (e.verified ? "yes" : "no") << "\n";
    }
}

/// Distinct texts within `max_edits` single-character substitutions of some
/// a-priori entry, none of them a-priori entries themselves. Substitutions
/// draw from the characters the list itself uses, so mimics stay in its
/// style. Deterministic per seed.
inline std::vector<std::string> mimic_candidates(const std::vector<std::string>& apriori,
                                                 std::size_t n_mimics, int max_edits,
                                                 RandomSource& rng) {
    if (max_edits < 1) throw std::invalid_argument("mimic_candidates: max_edits must be >= 1");
    if (n_mimics == 0) return {};
    if (apriori.empty()) {
        throw std::invalid_argument("mimic_candidates: a-priori list is empty");
    }
    std::set<char> alphabet_set;
    for (const auto& s : apriori) {
        for (char c : s) alphabet_set.insert(c);
    }
    const std::vector<char> alphabet(alphabet_set.begin(), alphabet_set.end());

    // upper bound on the distinct neighborhood; if even this cannot reach
    // n_mimics the space is exhausted for certain
    const std::uint64_t others = alphabet.empty() ? 0 : alphabet.size() - 1;
    long double bound = 0;
    for (const auto& s : apriori) {
        const std::size_t edits_max =
            std::min<std::size_t>(static_cast<std::size_t>(max_edits), s.size());
        long double per_entry = 0;
        for (std::size_t e = 1; e <= edits_max; ++e) {
            long double term = static_cast<long double>(binomial(s.size(), e));
            for (std::size_t k = 0; k < e; ++k) term *= static_cast<long double>(others);
            per_entry += term;
        }
        bound += per_entry;
    }
    if (bound < static_cast<long double>(n_mimics)) {
        throw std::runtime_error("mimic_candidates: the substitution neighborhood holds at most " +
                                 std::to_string(static_cast<double>(bound)) + " texts, fewer than " +
                                 std::to_string(n_mimics));
    }

    const std::set<std::string> originals(apriori.begin(), apriori.end());
    std::set<std::string> seen;
    std::vector<std::string> out;
    const std::uint64_t budget = std::max<std::uint64_t>(100000, 200 * n_mimics);
    for (std::uint64_t attempt = 0; attempt < budget && out.size() < n_mimics; ++attempt) {
        const std::string& base = apriori[rng.below(apriori.size())];
        if (base.empty()) continue;
        const std::size_t edits =
            1 + rng.below(std::min<std::uint64_t>(static_cast<std::uint64_t>(max_edits),
                                                  base.size()));
        std::string cand = base;
        // pick `edits` distinct positions
        std::vector<std::size_t> pos(base.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        for (std::size_t e = 0; e < edits; ++e) {
            const std::size_t j = e + rng.below(pos.size() - e);
            std::swap(pos[e], pos[j]);
            char replacement = cand[pos[e]];
            if (others == 0) break;
            while (replacement == base[pos[e]]) {
                replacement = alphabet[rng.below(alphabet.size())];
            }
            cand[pos[e]] = replacement;
        }
        if (cand == base || originals.count(cand)) continue;
        if (seen.insert(cand).second) out.push_back(std::move(cand));
    }
    if (out.size() < n_mimics) {
        throw std::runtime_error("mimic_candidates: sampling budget exhausted at " +
                                 std::to_string(out.size()) + " of " + std::to_string(n_mimics) +
                                 " mimics");
    }
    return out;
}

/// Shannon's ratio: ciphertext symbols needed before the key is pinned down.
inline double unicity_distance(double key_entropy_bits, double redundancy_bits_per_symbol) {
    if (!(redundancy_bits_per_symbol > 0)) {
        throw std::invalid_argument("unicity_distance: redundancy must be positive");
    }
    if (key_entropy_bits < 0) {
        throw std::invalid_argument("unicity_distance: key entropy must be non-negative");
    }
    return key_entropy_bits / redundancy_bits_per_symbol;
}

/// Hill-climbing search for a BitFlip alphabet under which the observed
/// token stream decodes to the decoy text. Desk scale only (l <= 10, n <= 4).
/// Not-found (nullopt) is a legitimate outcome; any alphabet returned has
/// been re-checked through the BitFlip decoder and validator.
inline std::optional<bitflip::Alphabet> forge_bitflip_alphabet(
    const std::vector<BitString>& tokens, std::string_view decoy, int n, int l,
    std::uint64_t budget, RandomSource& rng) {
    if (l < 1 || l > 10) {
        throw std::invalid_argument("forge_bitflip_alphabet: l must be in [1, 10]");
    }
    if (n < 1 || n > 4) {
        throw std::invalid_argument("forge_bitflip_alphabet: n must be in [1, 4]");
    }
    if (decoy.size() != tokens.size()) {
        throw std::invalid_argument("forge_bitflip_alphabet: decoy has " +
                                    std::to_string(decoy.size()) + " symbols but the stream has " +
                                    std::to_string(tokens.size()) + " tokens");
    }
    for (const auto& t : tokens) {
        if (t.size() != static_cast<std::size_t>(l)) {
            throw std::invalid_argument("forge_bitflip_alphabet: token length mismatch");
        }
    }

    // symbol table: the decoy's characters first, fillers after
    std::vector<char> symbols;
    for (char c : decoy) {
        if (std::find(symbols.begin(), symbols.end(), c) == symbols.end()) symbols.push_back(c);
    }
    if (symbols.size() > static_cast<std::size_t>(n)) {
        throw std::invalid_argument("forge_bitflip_alphabet: decoy uses " +
                                    std::to_string(symbols.size()) + " symbols, alphabet has " +
                                    std::to_string(n));
    }
    for (char f : bitflip::kSymbolTable) {
        if (symbols.size() == static_cast<std::size_t>(n)) break;
        if (std::find(symbols.begin(), symbols.end(), f) == symbols.end()) symbols.push_back(f);
    }

    const auto with_symbols = [&](bitflip::Alphabet a) {
        std::vector<bitflip::Letter> letters = a.letters();
        for (std::size_t i = 0; i < letters.size(); ++i) letters[i].symbol = symbols[i];
        return bitflip::Alphabet(a.token_length(), std::move(letters));
    };

    const auto score = [&](const bitflip::Alphabet& a) -> std::size_t {
        std::size_t matches = 0;
        for (std::size_t j = 0; j < tokens.size(); ++j) {
            const auto out = bitflip::decode_token(a, tokens[j]);
            if (out.is_letter() && a.letter(out.letter).symbol == decoy[j]) ++matches;
        }
        return matches;
    };

    const std::size_t target = tokens.size();
    std::uint64_t evaluations = 0;
    while (evaluations < budget) {
        bitflip::Alphabet cur = with_symbols(bitflip::random_alphabet(n, l, rng));
        std::size_t cur_score = score(cur);
        ++evaluations;
        bool cur_checked = false;
        std::size_t stall = 0;
        while (evaluations < budget && stall < 300) {
            if (cur_score == target && !cur_checked) {
                cur_checked = true;
                if (bitflip::validate(cur).valid &&
                    bitflip::decode_stream(cur, tokens).text == decoy) {
                    return cur;
                }
            }
            bitflip::Alphabet cand = evolve::mutate(cur, rng);
            const std::size_t s = score(cand);
            ++evaluations;
            if (s >= cur_score) {
                stall = (s > cur_score) ? 0 : stall + 1;
                if (s > cur_score || s == target) cur_checked = false;
                cur = std::move(cand);
                cur_score = s;
            } else {
                ++stall;
            }
        }
    }
    return std::nullopt;
}

} // namespace decoykit::equivocation
