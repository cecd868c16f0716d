#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "omega_forge/construct.hpp"

using namespace omega_forge;
using construct::BankSpec;
using construct::CoverEntry;
using construct::Label;
using construct::Params;
using ntcore::Int;

namespace {

Params faithful_params(double x) {
    Params p;
    p.mode = construct::Mode::paper_faithful;
    p.K = 2;
    p.epsilon = 0.1;
    p.x = x;
    return p;
}

CoverEntry entry_with_q(uint64_t q) {
    CoverEntry e;
    e.q = Int(static_cast<unsigned long>(q));
    return e;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("interval schedule") {
    Params p = faithful_params(1e10);
    auto s2 = interval_schedule(p, 2);
    CHECK(std::isfinite(s2.log_lo));
    CHECK(std::isfinite(s2.log_hi));
    CHECK(s2.log_lo < s2.log_hi);
    CHECK(s2.infeasible); // far too thin to host the required prime count
    // stage 2 uses the lower exponent 4 / ML
    auto d = construct::derive_params(p);
    CHECK(s2.exp_lo == doctest::Approx(4.0 / (d.M * d.L)));
    CHECK_THROWS_AS(interval_schedule(p, 1), ConfigError);
    CHECK_THROWS_AS(interval_schedule(p, 3), ConfigError); // a > K
}

TEST_CASE("interval schedule nesting") {
    Params p = faithful_params(1e10);
    p.K = 5;
    for (int a = 2; a < 5; ++a) {
        auto cur = interval_schedule(p, a);
        auto next = interval_schedule(p, a + 1);
        CHECK(cur.exp_hi <= next.exp_lo);
        CHECK(cur.log_hi <= next.log_lo);
    }
}

TEST_CASE("select_prime_bank greedy") {
    Label lab;
    std::set<uint64_t> used;
    auto bank = construct::select_prime_bank(lab, 3, 20, {}, 1.2, 3.0, used);
    CHECK(bank.primes == std::vector<uint64_t>{3}); // (1 - 1/3)^{-1} = 1.5 >= 1.2
    CHECK(bank.product_value == doctest::Approx(1.5));
    CHECK(used.count(3) == 1);

    std::set<uint64_t> used2;
    auto single = construct::select_prime_bank(lab, 3, 20, {}, 1.0, 1e9, used2);
    CHECK(single.primes.size() == 1);
    CHECK(single.primes[0] == 3);
}

TEST_CASE("select_prime_bank skips divisors of q' - 1") {
    Label lab;
    std::set<uint64_t> used;
    std::vector<CoverEntry> forbidden{entry_with_q(31)}; // q' - 1 = 30 = 2 * 3 * 5
    auto bank = construct::select_prime_bank(lab, 3, 40, forbidden, 1.2, 3.0, used);
    REQUIRE(!bank.primes.empty());
    CHECK(bank.primes[0] == 7);
    for (uint64_t p : bank.primes)
        CHECK(30 % p != 0);
}

TEST_CASE("select_prime_bank failure modes") {
    Label lab;
    std::set<uint64_t> used;
    // {3} -> 1.5, {3,5} -> 1.875, {3,5,7} -> 2.1875 > 2.1: overshoot
    CHECK_THROWS_AS(construct::select_prime_bank(lab, 3, 20, {}, 2.0, 2.1, used),
                    TargetOvershoot);
    std::set<uint64_t> used2;
    CHECK_THROWS_AS(construct::select_prime_bank(lab, 3, 6, {}, 3.0, 10.0, used2),
                    InsufficientPrimes);
}

TEST_CASE("build_cover_entries examples") {
    construct::PrimeBank bank;
    bank.primes = {5};
    auto one = construct::build_cover_entries(bank, 2, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].index_set == std::vector<unsigned>{1});
    CHECK(one[0].m == 5);
    CHECK(one[0].q == 31);
    CHECK(one[0].target_exponent == 0);

    bank.primes = {5, 7};
    auto two = construct::build_cover_entries(bank, 2, 2);
    REQUIRE(two.size() == 3);
    CHECK(two[0].m == 5);
    CHECK(two[0].q == 31);
    CHECK(two[1].m == 7);
    CHECK(two[1].q == 127);
    CHECK(two[2].m == 35);
    CHECK(two[2].q == 122921);
    CHECK(two[2].index_set == std::vector<unsigned>{1, 2});
    CHECK(two[2].target_exponent == 1);

    bank.primes = {3, 11};
    auto three = construct::build_cover_entries(bank, 2, 2);
    REQUIRE(three.size() == 3);
    CHECK(three[0].q == 7);
    CHECK(three[1].q == 89);
    CHECK(three[2].q == 599479);
}

TEST_CASE("build_cover_entries zsygmondy policy") {
    construct::PrimeBank bank;
    bank.primes = {2, 3}; // subset {1,2} -> m = 6, a = 2: no primitive prime
    CHECK_THROWS_AS(construct::build_cover_entries(bank, 2, 2), NoPrimitivePrime);
    auto skipped = construct::build_cover_entries(bank, 2, 2, /*skip_no_primitive=*/true);
    CHECK(skipped.size() == 2); // m = 2 and m = 3 survive
}

TEST_CASE("assemble_label") {
    construct::PrimeBank bank;
    bank.primes = {5};
    auto entries = construct::build_cover_entries(bank, 2, 1);

    auto plus = construct::assemble_label(entries, 1, 1, 2);
    CHECK(plus.modulus == 31);
    CHECK(plus.residue == 30); // -2^0 * 1 mod 31

    auto minus = construct::assemble_label(entries, 1, -1, 2);
    CHECK(minus.residue == 1);

    construct::PrimeBank pair;
    pair.primes = {5, 7};
    auto pair_entries = construct::build_cover_entries(pair, 2, 1); // q = 31, 127
    auto lr = construct::assemble_label(pair_entries, 1, 1, 2);
    CHECK(lr.modulus == 31 * 127);
    CHECK(lr.residue % 31 == 30);
    CHECK(lr.residue % 127 == 126);

    auto dup = entries;
    dup.push_back(entries[0]);
    CHECK_THROWS_AS(construct::assemble_label(dup, 1, 1, 2), ConstructionConflict);
}

TEST_CASE("build and assemble_global") {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 1;
    p.smax = 1;
    Label plus{2, 1, 1, 1};
    Label minus{2, 1, -1, 1};
    BankSpec b5;
    b5.primes = {5};
    BankSpec b13;
    b13.primes = {13};
    p.labels = {{plus, b5}, {minus, b13}};

    auto c = construct::build(p);
    c.validate();
    CHECK(c.modulus == Int(31) * 8191); // 253921
    CHECK(c.residue % 31 == 30);
    CHECK(c.residue % 8191 == 1);
    CHECK(c.gcd_wb == 1);
    CHECK(c.families().size() == 2);

    // single label, single entry: identity assembly
    Params solo = p;
    solo.labels = {{plus, b5}};
    auto cs = construct::build(solo);
    CHECK(cs.modulus == 31);
    CHECK(cs.residue == 30);
}

TEST_CASE("build rejects bad configs") {
    Params p;
    p.mode = construct::Mode::scaled;
    p.smax = 1;
    CHECK_THROWS_AS(construct::build(p), ConfigError); // no labels

    BankSpec dup;
    dup.primes = {5};
    p.labels = {{Label{2, 1, 1, 1}, dup}, {Label{2, 1, -1, 1}, dup}};
    CHECK_THROWS_AS(construct::build(p), ConstructionConflict); // shared prime

    BankSpec composite;
    composite.primes = {15};
    p.labels = {{Label{2, 1, 1, 1}, composite}};
    CHECK_THROWS_AS(construct::build(p), ConfigError);
}

TEST_CASE("serialization round trip is byte exact") {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 1;
    p.smax = 2;
    BankSpec spec;
    spec.primes = {5, 7};
    p.labels = {{Label{2, 1, 1, 1}, spec}};
    auto c = construct::build(p);

    std::string path1 = "construct_rt_1.json";
    std::string path2 = "construct_rt_2.json";
    construct::save(c, path1);
    auto c2 = construct::load(path1);
    construct::save(c2, path2);
    CHECK(slurp(path1) == slurp(path2));
    CHECK(construct::to_json(c) == construct::to_json(c2));
    std::remove(path1.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("corrupted artifacts fail validation") {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 1;
    p.smax = 1;
    BankSpec spec;
    spec.primes = {5};
    p.labels = {{Label{2, 1, 1, 1}, spec}};
    auto c = construct::build(p);

    auto j = construct::to_json(c);
    auto broken = j;
    broken["b"] = Int(c.residue + 1).get_str();
    CHECK_THROWS(construct::construction_from_json(broken));

    broken = j;
    broken["entries"][0]["q"] = "37"; // wrong order
    CHECK_THROWS(construct::construction_from_json(broken));

    broken = j;
    broken.erase("W");
    CHECK_THROWS_AS(construct::construction_from_json(broken), ConfigError);
}

TEST_CASE("params round trip") {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 3;
    p.epsilon = 0.2;
    p.L = 2;
    p.smax = 2;
    p.h_max = 1000;
    BankSpec spec;
    spec.interval = {3, 50};
    spec.target = {1.2, 3.0};
    p.labels = {{Label{2, 1, 1, 1}, spec}};
    auto j = construct::params_to_json(p);
    auto p2 = construct::params_from_json(j);
    CHECK(construct::params_to_json(p2) == j);
}
