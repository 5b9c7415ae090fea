#pragma once

// Finite words over {0,..,N-1}, exhaustive lexicographic enumeration with
// partitioned ranges, and seeded Bernoulli sampling (splitmix64).

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace cospec {

using Word = std::vector<std::uint8_t>;

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;

// N^n, guarded against overflow past the budget check's range.
inline std::uint64_t checked_pow(int N, int n) {
    std::uint64_t r = 1;
    for (int i = 0; i < n; ++i) {
        if (r > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(N))
            throw BudgetExceeded("word count overflows the enumeration range");
        r *= static_cast<std::uint64_t>(N);
    }
    return r;
}

// Lexicographic rank, first symbol most significant.
inline std::uint64_t word_rank(const Word& w, int N) {
    std::uint64_t r = 0;
    for (std::uint8_t s : w) r = r * static_cast<std::uint64_t>(N) + s;
    return r;
}

inline Word word_unrank(std::uint64_t rank, int N, int n) {
    Word w(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        w[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(rank % static_cast<std::uint64_t>(N));
        rank /= static_cast<std::uint64_t>(N);
    }
    return w;
}

// Half-open rank range of words, all of length n over alphabet N.
struct WordRange {
    int N;
    int n;
    std::uint64_t begin_rank;
    std::uint64_t end_rank;
};

inline WordRange enumerate_words(int N, int n, std::uint64_t budget = kDefaultBudget) {
    if (N < 2) throw InvalidArgument("alphabet size must be >= 2");
    if (n < 0) throw InvalidArgument("word length must be >= 0");
    std::uint64_t total = checked_pow(N, n);
    if (total > budget) throw BudgetExceeded("N^n exceeds the enumeration budget");
    return {N, n, 0, total};
}

// k contiguous sub-ranges covering the same words (empty tails allowed).
inline std::vector<WordRange> partition_words(const WordRange& r, int parts) {
    if (parts < 1) throw InvalidArgument("partition count must be >= 1");
    std::vector<WordRange> out;
    std::uint64_t total = r.end_rank - r.begin_rank;
    std::uint64_t base = total / static_cast<std::uint64_t>(parts);
    std::uint64_t rem = total % static_cast<std::uint64_t>(parts);
    std::uint64_t at = r.begin_rank;
    for (int p = 0; p < parts; ++p) {
        std::uint64_t len = base + (static_cast<std::uint64_t>(p) < rem ? 1 : 0);
        out.push_back({r.N, r.n, at, at + len});
        at += len;
    }
    return out;
}

// Visits words in rank order, reusing one buffer (odometer increment).
template <class F>
inline void for_each_word(const WordRange& r, F&& f) {
    if (r.begin_rank >= r.end_rank) return;
    Word w = word_unrank(r.begin_rank, r.N, r.n);
    for (std::uint64_t rank = r.begin_rank;; ) {
        f(rank, static_cast<const Word&>(w));
        if (++rank == r.end_rank) break;
        for (int i = r.n - 1; i >= 0; --i) {
            auto& s = w[static_cast<std::size_t>(i)];
            if (++s < r.N) break;
            s = 0;
        }
    }
}

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform in [0,1) with 53 random bits.
inline double splitmix64_u01(std::uint64_t& state) {
    return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

// Seeded i.i.d. symbol source. The algorithm name is part of the output
// metadata contract: "splitmix64".
struct BernoulliSampler {
    std::vector<double> weights;
    std::uint64_t seed;
    std::uint64_t state;

    BernoulliSampler(std::vector<double> w, std::uint64_t s)
        : weights(std::move(w)), seed(s), state(s) {
        if (weights.size() < 2) throw InvalidArgument("sampler needs >= 2 weights");
        double sum = 0.0;
        for (double x : weights) {
            if (x < 0.0) throw InvalidArgument("sampler weights must be >= 0");
            sum += x;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw InvalidArgument("sampler weights must sum to 1");
    }

    static BernoulliSampler uniform(int N, std::uint64_t seed) {
        return BernoulliSampler(std::vector<double>(static_cast<std::size_t>(N), 1.0 / N), seed);
    }

    // Independent child stream: child seed is the splitmix64 mix of the
    // parent seed xor a per-index gamma multiple.
    BernoulliSampler split(std::uint64_t index) const {
        std::uint64_t t = seed ^ ((index + 1) * 0x9E3779B97F4A7C15ull);
        return BernoulliSampler(weights, splitmix64_next(t));
    }

    std::uint8_t next_symbol() {
        double u = splitmix64_u01(state);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<std::uint8_t>(i);
        }
        return static_cast<std::uint8_t>(weights.size() - 1);
    }

    Word sample_sequence(std::uint64_t length) {
        Word w(length);
        for (auto& s : w) s = next_symbol();
        return w;
    }
};

} // namespace cospec
