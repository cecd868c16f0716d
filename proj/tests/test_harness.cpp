#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "omega_forge/harness.hpp"

using namespace omega_forge;
using construct::BankSpec;
using construct::Label;
using construct::Params;
using ntcore::Int;

namespace {

// the L=1 toy: one label (2,1,1,1) with bank {5} -> W = 31, b = 30
construct::Construction toy_plus() {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 1;
    p.smax = 1;
    BankSpec spec;
    spec.primes = {5};
    p.labels = {{Label{2, 1, 1, 1}, spec}};
    return construct::build(p);
}

// k = -1 variant: bank {13} -> q = 8191, b_r = 1
construct::Construction toy_minus() {
    Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 1;
    p.smax = 1;
    BankSpec spec;
    spec.primes = {13};
    p.labels = {{Label{2, 1, -1, 1}, spec}};
    return construct::build(p);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("members_in_window") {
    auto c = toy_plus();
    auto three = harness::members_in_window(c, 1, 100, 16);
    REQUIRE(three.size() == 3);
    CHECK(three[0] == 30);
    CHECK(three[1] == 61);
    CHECK(three[2] == 92);

    auto self = harness::members_in_window(c, 30, 30, 16);
    REQUIRE(self.size() == 1);
    CHECK(self[0] == 30);

    auto rep = harness::members_in_window(c, 0, 30, 16);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0] == 30);

    auto capped = harness::members_in_window(c, 1, 1000, 2);
    CHECK(capped.size() == 2);

    CHECK_THROWS_AS(harness::members_in_window(c, 31, 40, 16), EmptyWindow);
}

TEST_CASE("guarantee_witnesses") {
    auto c = toy_plus();
    auto hits = harness::guarantee_witnesses(61, 2, 1, 1, 5, c);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].l == 1);
    CHECK(hits[0].indices == std::vector<unsigned>{1});
    CHECK(hits[0].q == 31); // 61 + 2^5 = 93 = 3 * 31

    CHECK(harness::guarantee_witnesses(61, 2, 1, 1, 3, c).empty()); // 3 != 0 mod 5

    auto m = toy_minus();
    Int n = m.residue + 2 * m.modulus; // 16383, safely above 2^13
    auto mh = harness::guarantee_witnesses(n, 2, 1, -1, 13, m);
    REQUIRE(mh.size() == 1);
    CHECK(mh[0].q == 8191);
    CHECK((n - ntcore::pow_ui(Int(2), 13)) % 8191 == 0);
}

TEST_CASE("verify_guarantee toy PASS") {
    auto c = toy_plus();
    harness::Caps caps;
    caps.max_members = 4;
    auto report = harness::verify_guarantee(c, 31, 31 * 10, 50, caps);
    CHECK(report.pass);
    REQUIRE(report.families.size() == 1);
    CHECK(report.families[0].failed.empty());
    CHECK(report.families[0].checked > 0);
    CHECK(report.families[0].passed == report.families[0].checked);
    CHECK(report.cross_checked > 0);
    CHECK(report.exceptional_h_count > 0); // h != 0 mod 5 are exceptional here
}

TEST_CASE("corrupted residue fails verification") {
    auto c = toy_plus();
    c.residue += 1; // break the congruence without revalidating
    harness::Caps caps;
    caps.max_members = 2;
    auto report = harness::verify_guarantee(c, 1, 1000, 20, caps);
    CHECK_FALSE(report.pass);
    REQUIRE(!report.families.empty());
    REQUIRE(!report.families[0].failed.empty());
    CHECK(report.families[0].failed[0].reason.find("does not divide") != std::string::npos);
}

TEST_CASE("empirical_exceptional") {
    auto c = toy_plus();
    harness::Caps caps;
    caps.max_members = 4;
    caps.seed = 7;
    auto s1 = harness::empirical_exceptional(c, 31, 1000, 30, caps);
    CHECK(s1.sampled_h > 0);
    CHECK(s1.checked == s1.below_level + s1.at_least_level + s1.undetermined);
    auto s2 = harness::empirical_exceptional(c, 31, 1000, 30, caps);
    CHECK(s1.sampled_h == s2.sampled_h);
    CHECK(s1.below_level == s2.below_level);
    CHECK(s1.fraction_below == s2.fraction_below);
}

TEST_CASE("theorem_scan") {
    auto c = toy_plus();
    harness::Caps caps;
    caps.max_members = 8;
    auto small = harness::theorem_scan(c, 31, 31 * 8, 25, caps);
    CHECK(small.members > 0);
    CHECK(small.good + small.bad + small.undetermined == small.members);
    CHECK(small.good_fraction >= 0.0);
    CHECK(small.good_fraction <= 1.0);
    // doubling the window never decreases the absolute good count
    auto big = harness::theorem_scan(c, 31, 31 * 16, 25, caps);
    CHECK(big.good >= small.good);
}

TEST_CASE("report emission is deterministic") {
    auto c = toy_plus();
    harness::Caps caps;
    caps.max_members = 3;
    caps.seed = 11;
    auto r1 = harness::verify_guarantee(c, 31, 500, 20, caps);
    auto s1 = harness::empirical_exceptional(c, 31, 500, 20, caps);
    auto r2 = harness::verify_guarantee(c, 31, 500, 20, caps);
    auto s2 = harness::empirical_exceptional(c, 31, 500, 20, caps);
    harness::emit_report(harness::report_to_json(r1, s1), "report_a.json");
    harness::emit_report(harness::report_to_json(r2, s2), "report_b.json");
    std::string a = slurp("report_a.json");
    CHECK(a == slurp("report_b.json"));
    CHECK(!a.empty());
    CHECK(a.back() == '\n');
    std::remove("report_a.json");
    std::remove("report_b.json");
}

TEST_CASE("construction hash is stable and content sensitive") {
    auto c = toy_plus();
    CHECK(harness::construction_hash(c) == harness::construction_hash(toy_plus()));
    CHECK(harness::construction_hash(c) != harness::construction_hash(toy_minus()));
}

TEST_CASE("reference micro construction") {
    auto c = harness::reference_micro_construction();
    c.validate();
    CHECK(c.entries.size() == 8);
    CHECK(c.banks.size() == 4);
    CHECK(c.gcd_wb == 1);
    std::vector<Int> qs;
    for (const auto& e : c.entries)
        qs.push_back(e.q);
    std::sort(qs.begin(), qs.end());
    std::vector<Int> expected{7, 31, 89, 127, 8191, 122921, 131071, 599479};
    CHECK(qs == expected);
    // W ~ 1.9e26
    CHECK(mpz_sizeinbase(c.modulus.get_mpz_t(), 10) == 27);
    CHECK(c.families().size() == 2);
}

TEST_CASE("micro verification over a small window") {
    auto c = harness::reference_micro_construction();
    harness::Caps caps;
    caps.max_members = 3;
    auto report = harness::verify_guarantee(c, c.modulus, c.modulus * 4, 200, caps);
    CHECK(report.pass);
    for (const auto& fam : report.families) {
        CHECK(fam.failed.empty());
        CHECK(fam.checked > 0);
    }
}

TEST_CASE("report_real") {
    CHECK(harness::report_real(0.1 + 0.2) == harness::report_real(0.3));
    CHECK(harness::report_real(1.0) == 1.0);
}
