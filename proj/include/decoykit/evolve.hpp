#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "decoykit/bitflip.hpp"

// Stochastic search for well-conditioned BitFlip alphabets: mutation-only
// evolution with elitism and size-2 tournaments. The fitness rewards
// transmitter capacity (the one-to-many supply), a target chaff fraction
// (the decoy supply) and balanced transmitter counts.
namespace decoykit::evolve {

class FitnessConfig {
public:
    FitnessConfig(double w_capacity, double w_chaff, double w_balance,
                  double target_chaff_fraction)
        : w_capacity_(w_capacity),
          w_chaff_(w_chaff),
          w_balance_(w_balance),
          target_chaff_(target_chaff_fraction) {
        if (w_capacity < 0 || w_chaff < 0 || w_balance < 0) {
            throw std::invalid_argument("fitness config: weights must be non-negative");
        }
        if (w_capacity == 0 && w_chaff == 0 && w_balance == 0) {
            throw std::invalid_argument("fitness config: at least one weight must be positive");
        }
        if (!(target_chaff_fraction > 0.0 && target_chaff_fraction < 1.0)) {
            throw std::invalid_argument("fitness config: target chaff fraction must be in (0,1)");
        }
    }

    double w_capacity() const { return w_capacity_; }
    double w_chaff() const { return w_chaff_; }
    double w_balance() const { return w_balance_; }
    double target_chaff() const { return target_chaff_; }

private:
    double w_capacity_, w_chaff_, w_balance_, target_chaff_;
};

/// Scalar fitness; -infinity for alphabets where some letter has no
/// transmitter (they cannot encode at all).
inline double fitness(const bitflip::Alphabet& a, const FitnessConfig& cfg) {
    const auto rep = bitflip::validate(a);
    if (!rep.valid) return -std::numeric_limits<double>::infinity();

    const auto min_count =
        *std::min_element(rep.transmitter_counts.begin(), rep.transmitter_counts.end());
    const double total = std::ldexp(1.0, a.token_length());
    const double chaff_fraction = static_cast<double>(rep.chaff_size()) / total;

    double mean = 0;
    for (auto c : rep.transmitter_counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(rep.transmitter_counts.size());
    double variance = 0;
    for (auto c : rep.transmitter_counts) {
        const double d = static_cast<double>(c) - mean;
        variance += d * d;
    }
    variance /= static_cast<double>(rep.transmitter_counts.size());

    return cfg.w_capacity() * static_cast<double>(min_count) +
           cfg.w_chaff() * (1.0 - std::abs(chaff_fraction - cfg.target_chaff())) +
           cfg.w_balance() * (-variance);
}

/// One mutation step: either flip a single bit of one letter string or move
/// one radius by +/-1. Structural rules are re-established by re-rolling
/// moves that would collide.
inline bitflip::Alphabet mutate(const bitflip::Alphabet& a, RandomSource& rng) {
    const int l = a.token_length();
    std::vector<bitflip::Letter> letters = a.letters();
    constexpr int kAttempts = 100000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::size_t i = rng.below(letters.size());
        if (rng.below(2) == 0) {
            // flip one bit, unless it would duplicate another letter string
            BitString s = letters[i].s.flipped(rng.below(static_cast<std::uint64_t>(l)));
            bool dup = false;
            for (std::size_t j = 0; j < letters.size(); ++j) {
                if (j != i && letters[j].s == s) dup = true;
            }
            if (dup) continue;
            letters[i].s = std::move(s);
            return bitflip::Alphabet(l, std::move(letters));
        }
        const int delta = rng.below(2) == 0 ? -1 : 1;
        const int h = letters[i].h + delta;
        if (h < 0 || h > l) continue;
        letters[i].h = h;
        return bitflip::Alphabet(l, std::move(letters));
    }
    throw std::runtime_error("mutate: no legal move found"); // unreachable for sane alphabets
}

struct EvolutionReport {
    std::vector<double> best_per_generation;
    bitflip::Alphabet final_alphabet;
    std::uint64_t evaluations = 0;
};

/// Generational loop: evaluate everyone, carry the top 10% unchanged, refill
/// with mutated winners of size-2 tournaments. The best fitness per
/// generation never decreases; the returned alphabet is the best ever seen.
inline EvolutionReport evolve_alphabet(int n, int l, std::size_t population,
                                       std::size_t generations, const FitnessConfig& cfg,
                                       RandomSource& rng) {
    if (population < 2) throw std::invalid_argument("evolve_alphabet: population must be >= 2");
    if (generations < 1) throw std::invalid_argument("evolve_alphabet: need >= 1 generation");
    if (n < 1 || l < 1) throw std::invalid_argument("evolve_alphabet: n and l must be >= 1");
    if (l > bitflip::kMaxScanBits) {
        throw std::invalid_argument("evolve_alphabet: fitness needs l <= " +
                                    std::to_string(bitflip::kMaxScanBits));
    }

    std::vector<bitflip::Alphabet> pop;
    pop.reserve(population);
    for (std::size_t i = 0; i < population; ++i) {
        pop.push_back(bitflip::random_alphabet(n, l, rng));
    }

    std::vector<double> best_per_generation;
    best_per_generation.reserve(generations);
    std::uint64_t evaluations = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<bitflip::Alphabet> hall; // holds the single best ever seen
    std::vector<double> fits(population);

    for (std::size_t gen = 0; gen < generations; ++gen) {
        for (std::size_t i = 0; i < population; ++i) {
            fits[i] = fitness(pop[i], cfg);
        }
        evaluations += population;

        std::vector<std::size_t> order(population);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return fits[x] > fits[y]; });

        const double gen_best = fits[order.front()];
        best_per_generation.push_back(gen_best);
        if (gen_best > best_score || hall.empty()) {
            best_score = gen_best;
            hall.clear();
            hall.push_back(pop[order.front()]);
        }

        if (gen + 1 == generations) break;

        const std::size_t elite = std::max<std::size_t>(1, population / 10);
        std::vector<bitflip::Alphabet> next;
        next.reserve(population);
        for (std::size_t e = 0; e < elite; ++e) next.push_back(pop[order[e]]);
        while (next.size() < population) {
            const std::size_t c1 = rng.below(population);
            const std::size_t c2 = rng.below(population);
            const std::size_t winner = fits[c1] >= fits[c2] ? c1 : c2;
            next.push_back(mutate(pop[winner], rng));
        }
        pop = std::move(next);
    }

    if (std::isinf(best_score) && best_score < 0) {
        throw std::runtime_error("evolve_alphabet: every candidate had an empty transmitter set");
    }
    return {std::move(best_per_generation), std::move(hall.front()), evaluations};
}

} // namespace decoykit::evolve
