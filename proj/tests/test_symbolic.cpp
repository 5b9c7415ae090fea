#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <cocycle_spectra/symbolic.hpp>

using namespace cospec;

TEST_CASE("word rank and unrank round-trip, first symbol most significant") {
    CHECK(word_rank(Word{0, 0, 1}, 2) == 1);
    CHECK(word_rank(Word{1, 0, 0}, 2) == 4);
    CHECK(word_unrank(4, 2, 3) == Word{1, 0, 0});
    for (std::uint64_t r = 0; r < 81; ++r)
        CHECK(word_rank(word_unrank(r, 3, 4), 3) == r);
}

TEST_CASE("enumeration visits every word exactly once") {
    WordRange range = enumerate_words(2, 12);
    CHECK(range.end_rank - range.begin_rank == 4096);
    std::vector<bool> seen(4096, false);
    for_each_word(range, [&](std::uint64_t rank, const Word& w) {
        REQUIRE(rank < 4096);
        CHECK_FALSE(seen[rank]);
        seen[rank] = true;
        CHECK(word_rank(w, 2) == rank);
    });
    CHECK(std::count(seen.begin(), seen.end(), true) == 4096);
}

TEST_CASE("length zero enumerates the single empty word") {
    WordRange range = enumerate_words(2, 0);
    int visits = 0;
    for_each_word(range, [&](std::uint64_t rank, const Word& w) {
        CHECK(rank == 0);
        CHECK(w.empty());
        ++visits;
    });
    CHECK(visits == 1);
}

TEST_CASE("partitions cover the range with balanced sizes") {
    WordRange range = enumerate_words(2, 10);
    std::vector<WordRange> parts = partition_words(range, 7);
    REQUIRE(parts.size() == 7);
    std::uint64_t total = 0;
    std::uint64_t hi = 0, lo = UINT64_MAX;
    std::uint64_t cursor = range.begin_rank;
    for (const auto& p : parts) {
        CHECK(p.begin_rank == cursor);
        cursor = p.end_rank;
        std::uint64_t size = p.end_rank - p.begin_rank;
        total += size;
        hi = std::max(hi, size);
        lo = std::min(lo, size);
    }
    CHECK(cursor == range.end_rank);
    CHECK(total == 1024);
    CHECK(hi - lo <= 1);
}

TEST_CASE("enumeration guards budget and arguments") {
    CHECK_THROWS_AS(enumerate_words(2, 25), BudgetExceeded); // 2^25 > default 2^24
    CHECK_NOTHROW(enumerate_words(2, 24));
    CHECK_THROWS_AS(enumerate_words(1, 4), InvalidArgument);
    CHECK_THROWS_AS(enumerate_words(2, -1), InvalidArgument);
    CHECK_THROWS_AS(checked_pow(2, 63), BudgetExceeded);
}

TEST_CASE("splitmix64 matches the reference sequence from seed zero") {
    std::uint64_t st = 0;
    CHECK(splitmix64_next(st) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64_next(st) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64_next(st) == 0x06C45D188009454Full);

    std::uint64_t su = 123;
    for (int i = 0; i < 1000; ++i) {
        double u = splitmix64_u01(su);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sampler validates its weights") {
    CHECK_THROWS_AS(BernoulliSampler({1.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(BernoulliSampler({0.7, -0.3, 0.6}, 1), InvalidArgument);
    CHECK_THROWS_AS(BernoulliSampler({0.5, 0.4}, 1), InvalidArgument);
    CHECK_NOTHROW(BernoulliSampler({0.5, 0.5}, 1));
    CHECK_NOTHROW(BernoulliSampler::uniform(3, 9));
}

TEST_CASE("uniform sampler hits equal frequencies") {
    BernoulliSampler s = BernoulliSampler::uniform(2, 2024);
    int ones = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ones += s.next_symbol();
    CHECK(std::fabs(ones / static_cast<double>(draws) - 0.5) < 0.01);
}

TEST_CASE("weighted sampler tracks its weights") {
    BernoulliSampler s({0.2, 0.3, 0.5}, 77);
    std::vector<int> counts(3, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[s.next_symbol()];
    CHECK(std::fabs(counts[0] / static_cast<double>(draws) - 0.2) < 0.01);
    CHECK(std::fabs(counts[1] / static_cast<double>(draws) - 0.3) < 0.01);
    CHECK(std::fabs(counts[2] / static_cast<double>(draws) - 0.5) < 0.01);
}

TEST_CASE("sampling is deterministic with prefix consistency") {
    BernoulliSampler a = BernoulliSampler::uniform(2, 5);
    BernoulliSampler b = BernoulliSampler::uniform(2, 5);
    Word w1 = a.sample_sequence(64);
    Word w2 = b.sample_sequence(64);
    CHECK(w1 == w2);

    // a fresh sampler's shorter sequence is a prefix of the longer one
    BernoulliSampler c = BernoulliSampler::uniform(2, 5);
    Word w3 = c.sample_sequence(32);
    CHECK(Word(w1.begin(), w1.begin() + 32) == w3);
}

TEST_CASE("split children are deterministic and independent of the parent state") {
    BernoulliSampler parent = BernoulliSampler::uniform(2, 11);
    BernoulliSampler c0 = parent.split(0);
    Word w0 = c0.sample_sequence(32);

    // splitting again gives the same child stream
    BernoulliSampler c0b = parent.split(0);
    CHECK(c0b.sample_sequence(32) == w0);

    // drawing from the parent does not change the children
    BernoulliSampler parent2 = BernoulliSampler::uniform(2, 11);
    parent2.sample_sequence(100);
    CHECK(parent2.split(0).sample_sequence(32) == w0);

    // different indices decorrelate
    CHECK(parent.split(1).sample_sequence(32) != w0);
}
