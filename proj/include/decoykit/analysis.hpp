#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "decoykit/bitflip.hpp"
#include "decoykit/bitstring.hpp"

// The adversary's bench: a small randomness battery (monobit, runs,
// chi-square), token frequency analysis, and a distinguisher experiment that
// quantifies how much a key-knowing pattern attacker learns from the wire.
namespace decoykit::analysis {

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    double alpha = 0.0;
    bool pass = false;        // p_value >= alpha
    bool applicable = true;   // false when a gate keeps the test from running
};

/// Two-sided frequency test on the ones count (normal approximation).
inline TestResult monobit_test(const BitString& bits, double alpha) {
    if (bits.size() < 100) {
        throw std::invalid_argument("monobit_test: need at least 100 bits, got " +
                                    std::to_string(bits.size()));
    }
    const double n = static_cast<double>(bits.size());
    const double ones = static_cast<double>(bits.popcount());
    const double s_obs = std::abs(2.0 * ones - n) / std::sqrt(n);
    const double p = std::erfc(s_obs / std::sqrt(2.0));
    return {"monobit", s_obs, p, alpha, p >= alpha, true};
}

/// Runs test (count of maximal same-bit blocks vs its expectation). Gated on
/// the monobit proportion being within [0.4, 0.6]; outside the gate the
/// result is reported not-applicable rather than failed.
inline TestResult runs_test(const BitString& bits, double alpha) {
    if (bits.size() < 100) {
        throw std::invalid_argument("runs_test: need at least 100 bits, got " +
                                    std::to_string(bits.size()));
    }
    const double n = static_cast<double>(bits.size());
    const double pi = static_cast<double>(bits.popcount()) / n;
    if (pi < 0.4 || pi > 0.6) {
        return {"runs", 0.0, 0.0, alpha, false, false};
    }
    double runs = 1;
    for (std::size_t i = 1; i < bits.size(); ++i) {
        if (bits.get(i) != bits.get(i - 1)) ++runs;
    }
    const double expected = 2.0 * n * pi * (1.0 - pi);
    const double denom = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
    const double p = std::erfc(std::abs(runs - expected) / denom);
    return {"runs", runs, p, alpha, p >= alpha, true};
}

/// Chi-square goodness of fit against the uniform distribution over the
/// histogram's buckets; p-value from the regularized upper incomplete gamma.
inline TestResult chi_square_uniformity(const std::vector<std::uint64_t>& observed,
                                        double alpha) {
    const std::size_t k = observed.size();
    if (k < 2) {
        throw std::invalid_argument("chi_square_uniformity: need at least 2 buckets");
    }
    std::uint64_t total = 0;
    for (auto c : observed) total += c;
    if (total < 5 * k) {
        throw std::invalid_argument("chi_square_uniformity: " + std::to_string(total) +
                                    " samples are too few for " + std::to_string(k) +
                                    " buckets (need >= 5 per bucket)");
    }
    const double expected = static_cast<double>(total) / static_cast<double>(k);
    double stat = 0;
    for (auto c : observed) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    const double p = boost::math::gamma_q(static_cast<double>(k - 1) / 2.0, stat / 2.0);
    return {"chi_square", stat, p, alpha, p >= alpha, true};
}

struct FrequencyReport {
    std::map<BitString, std::uint64_t> histogram;
    double repeat_index = 0.0; // fraction of adjacent equal token pairs
};

inline FrequencyReport frequency_analysis(const std::vector<BitString>& tokens) {
    FrequencyReport rep;
    std::uint64_t repeats = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        ++rep.histogram[tokens[i]];
        if (i > 0 && tokens[i] == tokens[i - 1]) ++repeats;
    }
    if (tokens.size() > 1) {
        rep.repeat_index = static_cast<double>(repeats) / static_cast<double>(tokens.size() - 1);
    }
    return rep;
}

struct AdvantageReport {
    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    double advantage = 0.0; // max(0, 2*correct/trials - 1)
};

namespace detail {

// Tokens for the distinguisher come straight from the letter-sphere
// geometry, so the experiment also covers alphabets whose spheres overlap
// (where no unambiguous transmitter exists and encode_message refuses):
// randomized mode draws uniformly from sphere(s_i, h_i); degenerate mode
// deterministically flips the first h_i bits of s_i.
inline BitString emit_token(const bitflip::Alphabet& a, std::size_t letter,
                            bitflip::EncodeMode mode, RandomSource& rng) {
    const auto& e = a.letter(letter);
    if (mode == bitflip::EncodeMode::degenerate) {
        BitString t = e.s;
        for (int b = 0; b < e.h; ++b) t.flip(static_cast<std::size_t>(b));
        return t;
    }
    return random_sphere_point(e.s, static_cast<std::size_t>(e.h), rng);
}

// feature vector: token counts per message position, averaged per encoding
using Feature = std::map<std::pair<std::size_t, BitString>, double>;

inline Feature message_feature(const bitflip::Alphabet& a, const std::vector<std::size_t>& msg,
                               std::size_t samples, bitflip::EncodeMode mode, RandomSource& rng) {
    Feature f;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t pos = 0; pos < msg.size(); ++pos) {
            f[{pos, emit_token(a, msg[pos], mode, rng)}] += 1.0;
        }
    }
    for (auto& [key, v] : f) v /= static_cast<double>(samples);
    return f;
}

inline double feature_distance(const Feature& x, const Feature& y) {
    double d = 0;
    auto ix = x.begin();
    auto iy = y.begin();
    while (ix != x.end() || iy != y.end()) {
        if (iy == y.end() || (ix != x.end() && ix->first < iy->first)) {
            d += ix->second * ix->second;
            ++ix;
        } else if (ix == x.end() || iy->first < ix->first) {
            d += iy->second * iy->second;
            ++iy;
        } else {
            const double diff = ix->second - iy->second;
            d += diff * diff;
            ++ix;
            ++iy;
        }
    }
    return d;
}

inline std::vector<std::size_t> to_indices(const bitflip::Alphabet& a, std::string_view msg,
                                           const char* who) {
    std::vector<std::size_t> out;
    out.reserve(msg.size());
    for (std::size_t i = 0; i < msg.size(); ++i) {
        const auto idx = a.index_of(msg[i]);
        if (!idx) {
            throw std::invalid_argument(std::string(who) + ": symbol '" + std::string(1, msg[i]) +
                                        "' is not in the alphabet");
        }
        out.push_back(*idx);
    }
    return out;
}

} // namespace detail

inline constexpr std::size_t kDistinguisherTrainingSamples = 200;

/// Per trial, a secret fair coin picks one of the two messages; the chosen
/// message is encoded samples_per_trial times and a nearest-centroid
/// classifier over per-position token histograms (trained on fresh labeled
/// encodings under the same alphabet) guesses which. The adversary models a
/// key-knowing pattern attacker. Per-trial randomness is seeded
/// master + 1 + trial_index; training uses the master seed itself.
inline AdvantageReport distinguisher_experiment(const bitflip::Alphabet& a, std::string_view msg_a,
                                                std::string_view msg_b,
                                                std::size_t samples_per_trial, std::size_t trials,
                                                bitflip::EncodeMode mode, RandomSource& rng) {
    if (msg_a == msg_b) {
        throw std::invalid_argument("distinguisher_experiment: messages must differ");
    }
    if (msg_a.size() != msg_b.size() || msg_a.empty()) {
        throw std::invalid_argument(
            "distinguisher_experiment: messages must be non-empty and of equal length");
    }
    if (samples_per_trial == 0 || trials == 0) {
        throw std::invalid_argument(
            "distinguisher_experiment: samples_per_trial and trials must be positive");
    }
    const auto ia = detail::to_indices(a, msg_a, "distinguisher_experiment");
    const auto ib = detail::to_indices(a, msg_b, "distinguisher_experiment");

    const std::uint64_t master = rng.next_u64();

    // train centroids with an independent stream
    RandomSource train_rng(master);
    detail::Feature centroid_a, centroid_b;
    for (std::size_t s = 0; s < kDistinguisherTrainingSamples; ++s) {
        for (const auto& [key, v] :
             detail::message_feature(a, ia, 1, mode, train_rng)) {
            centroid_a[key] += v;
        }
        for (const auto& [key, v] :
             detail::message_feature(a, ib, 1, mode, train_rng)) {
            centroid_b[key] += v;
        }
    }
    for (auto& [key, v] : centroid_a) v /= static_cast<double>(kDistinguisherTrainingSamples);
    for (auto& [key, v] : centroid_b) v /= static_cast<double>(kDistinguisherTrainingSamples);

    AdvantageReport rep;
    rep.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        RandomSource trial_rng(master + 1 + t);
        const bool pick_a = trial_rng.below(2) == 0;
        const auto feature = detail::message_feature(a, pick_a ? ia : ib, samples_per_trial,
                                                     mode, trial_rng);
        const double da = detail::feature_distance(feature, centroid_a);
        const double db = detail::feature_distance(feature, centroid_b);
        const bool guess_a = da <= db;
        if (guess_a == pick_a) ++rep.correct;
    }
    const double raw =
        2.0 * static_cast<double>(rep.correct) / static_cast<double>(rep.trials) - 1.0;
    rep.advantage = std::max(0.0, raw);
    return rep;
}

} // namespace decoykit::analysis
