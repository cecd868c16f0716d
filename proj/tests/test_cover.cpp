#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "omega_forge/cover.hpp"

using namespace omega_forge;
using construct::PrimeBank;

namespace {

PrimeBank make_bank(std::vector<uint64_t> primes) {
    PrimeBank b;
    b.primes = std::move(primes);
    for (uint64_t p : b.primes)
        b.product_value *= static_cast<double>(p) / (static_cast<double>(p) - 1.0);
    return b;
}

// exhaustive subset search: is there I with |I| <= smax and h == |I|-1 (mod prod)?
bool covered_oracle(uint64_t h, const PrimeBank& bank, unsigned smax) {
    size_t T = bank.primes.size();
    for (uint64_t mask = 1; mask < (uint64_t(1) << T); ++mask) {
        unsigned s = static_cast<unsigned>(__builtin_popcountll(mask));
        if (s > smax)
            continue;
        uint64_t m = 1;
        for (size_t t = 0; t < T; ++t)
            if (mask & (uint64_t(1) << t))
                m *= bank.primes[t];
        if (h % m == s - 1)
            return true;
    }
    return false;
}

} // namespace

TEST_CASE("covered examples bank {5,7}") {
    auto bank = make_bank({5, 7});
    auto w10 = cover::covered(10, bank, 2);
    REQUIRE(w10.has_value());
    CHECK(w10->size == 1);
    CHECK(w10->indices == std::vector<unsigned>{1}); // 10 == 0 mod 5

    auto w1 = cover::covered(1, bank, 2);
    REQUIRE(w1.has_value());
    CHECK(w1->size == 2);
    CHECK(w1->indices == std::vector<unsigned>{1, 2}); // 1 == 1 mod 35

    CHECK_FALSE(cover::covered(3, bank, 2).has_value());
}

TEST_CASE("witness validity") {
    auto bank = make_bank({5, 7, 11});
    for (uint64_t h = 0; h < 5 * 7 * 11; ++h) {
        auto w = cover::covered(h, bank, 3);
        if (!w)
            continue;
        uint64_t m = 1;
        for (unsigned t : w->indices)
            m *= bank.primes[t - 1];
        CHECK(w->indices.size() == w->size);
        CHECK(h % m == w->size - 1);
    }
}

TEST_CASE("exceptional sets") {
    auto bank57 = make_bank({5, 7});
    auto ex = cover::exceptional_set(bank57, 2, 34);
    CHECK(ex.members.size() == 23);
    CHECK(ex.density() == doctest::Approx(23.0 / 35.0));
    for (uint64_t h : ex.members)
        CHECK_FALSE(cover::covered(h, bank57, 2).has_value());

    // single prime, smax 1: everything but h == 0 mod p is exceptional
    for (uint64_t p : {5ull, 11ull, 13ull}) {
        auto exp1 = cover::exceptional_set(make_bank({p}), 1, p - 1);
        CHECK(exp1.members.size() == p - 1);
        CHECK(exp1.members.front() == 1);
    }
}

TEST_CASE("union of exceptional sets") {
    auto a = cover::exceptional_set(make_bank({5, 7}), 2, 100);
    auto b = cover::exceptional_set(make_bank({11, 13}), 2, 100);
    auto u = cover::union_exceptional({a, b});
    CHECK(u.label == "global");
    CHECK(u.h_max == 100);
    CHECK(u.density() >= a.density());
    CHECK(u.density() >= b.density());
    for (uint64_t h : a.members) {
        bool in_union = std::find(u.members.begin(), u.members.end(), h) != u.members.end();
        CHECK(in_union);
    }
    CHECK(std::is_sorted(u.members.begin(), u.members.end()));
}

TEST_CASE("density over one period for {3,5,7}") {
    // exhaustive over lcm = 105: singles h == 0 mod p cover 57, and the pair
    // congruences h == 1 mod {15, 21, 35} add 10 more -> 67 covered, 38 left
    auto bank = make_bank({3, 5, 7});
    uint64_t covered_count = 0;
    for (uint64_t h = 0; h < 105; ++h) {
        bool mine = cover::covered(h, bank, 2).has_value();
        CHECK(mine == covered_oracle(h, bank, 2));
        if (mine)
            ++covered_count;
    }
    CHECK(covered_count == 67);
    auto ex = cover::exceptional_set(bank, 2, 104);
    CHECK(ex.members.size() == 38);
}

TEST_CASE("covered matches exhaustive oracle on random banks") {
    std::mt19937_64 rng(12345);
    std::vector<uint64_t> pool{5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
    for (int trial = 0; trial < 40; ++trial) {
        std::shuffle(pool.begin(), pool.end(), rng);
        size_t T = 2 + rng() % 4;
        auto bank = make_bank(std::vector<uint64_t>(pool.begin(), pool.begin() + T));
        std::sort(bank.primes.begin(), bank.primes.end());
        unsigned smax = 1 + rng() % 3;
        uint64_t lcm = std::accumulate(bank.primes.begin(), bank.primes.end(), uint64_t(1),
                                       std::multiplies<>());
        for (int probe = 0; probe < 200; ++probe) {
            uint64_t h = rng() % lcm;
            CHECK(cover::covered(h, bank, smax).has_value() == covered_oracle(h, bank, smax));
        }
    }
}

TEST_CASE("periodicity") {
    auto bank = make_bank({5, 7, 11});
    uint64_t period = 5 * 7 * 11;
    for (uint64_t h = 0; h < 600; ++h)
        CHECK(cover::covered(h, bank, 2).has_value() ==
              cover::covered(h + period, bank, 2).has_value());
}

TEST_CASE("pigeonhole invariant") {
    auto bank = make_bank({5, 7, 11, 13});
    unsigned smax = 2;
    auto ex = cover::exceptional_set(bank, smax, 2000);
    for (uint64_t h : ex.members)
        CHECK(cover::pigeonhole_count(h, bank, smax) < smax * smax);
}

TEST_CASE("density report") {
    std::vector<PrimeBank> banks{make_bank({5, 7}), make_bank({5, 7, 11}),
                                 make_bank({5, 7, 11, 13})};
    // labels so rows are distinguishable
    for (size_t i = 0; i < banks.size(); ++i)
        banks[i].label.l = static_cast<int>(i + 1);
    auto report = cover::density_report(banks, 2, 5000);
    REQUIRE(report.rows.size() == 3);
    CHECK(std::is_sorted(report.rows.begin(), report.rows.end(),
                         [](const auto& x, const auto& y) {
                             return x.product_value < y.product_value;
                         }));
    // appending a prime never increases the exceptional density
    CHECK(report.rows[1].density <= report.rows[0].density);
    CHECK(report.rows[2].density <= report.rows[1].density);
    CHECK(report.nonincreasing);
}
