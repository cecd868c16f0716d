#ifndef OMEGA_FORGE_HARNESS_HPP
#define OMEGA_FORGE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "omega_forge/construct.hpp"
#include "omega_forge/cover.hpp"

// End-to-end verification of the divisibility guarantee at scaled
// parameters, empirical study of the bad set, and report emission.
namespace omega_forge::harness {

using ntcore::Int;

struct Caps {
    size_t max_members = 16;        // members of S sampled per window
    size_t max_exceptional_h = 64;  // exceptional h sampled per run
    uint64_t seed = 0;
    unsigned max_factor_bits = 128; // values above this are "undetermined"
    ntcore::FactorBudget factor_budget{100000, uint64_t(1) << 20};
};

// up to max_count values n == b (mod W) in [x0, x1], ascending
std::vector<Int> members_in_window(const construct::Construction& c, const Int& x0,
                                   const Int& x1, size_t max_count);

struct WitnessHit {
    int l = 0;
    std::vector<unsigned> indices;
    Int q;
};

// For each copy l of the family (a, j, k): the cover witness for h, with its
// prime q checked to divide n j + a^h k (throws DivisibilityViolation if a
// witness prime fails to divide; that signals a construction bug).
std::vector<WitnessHit> guarantee_witnesses(const Int& n, int a, int j, int k, uint64_t h,
                                            const construct::Construction& c);

struct FailureTuple {
    std::string n;
    uint64_t h = 0;
    int a = 0, j = 0, k = 0;
    std::string reason;
};

struct FamilyOutcome {
    int a = 0, j = 0, k = 0;
    uint64_t checked = 0;
    uint64_t passed = 0;
    std::vector<FailureTuple> failed;
};

struct VerificationReport {
    std::string construction_hash;
    Int x0, x1;
    uint64_t h_max = 0;
    uint64_t seed = 0;
    std::vector<std::string> members; // sampled n, decimal
    uint64_t exceptional_h_count = 0; // |H intersect [0, h_max]|
    std::vector<FamilyOutcome> families;
    uint64_t cross_checked = 0; // tuples with |value| < 2^64 fully factored
    bool pass = false;
};

// For every sampled n, every family, every h in [0, h_max] outside the
// global exceptional set: >= L distinct witness primes divide n j + a^h k
// and the value is nonzero; small values are cross-checked by factorization.
VerificationReport verify_guarantee(const construct::Construction& c, const Int& x0,
                                    const Int& x1, uint64_t h_max, const Caps& caps = {});

struct ExceptionalStats {
    uint64_t sampled_h = 0;
    uint64_t checked = 0;      // (n, family, h) triples attempted
    uint64_t below_level = 0;  // omega(value) < L
    uint64_t at_least_level = 0;
    uint64_t undetermined = 0; // value too large or budget exhausted
    double fraction_below = 0; // below / (below + at_least); no verdict attached
    uint64_t seed = 0;
};

// fraction of sampled n with omega(n j + a^h k) < L for h inside the
// exceptional set; measured, never judged (the paper's claim is asymptotic)
ExceptionalStats empirical_exceptional(const construct::Construction& c, const Int& x0,
                                       const Int& x1, uint64_t h_max, const Caps& caps = {});

struct ScanResult {
    uint64_t members = 0;
    uint64_t good = 0;         // omega >= L for all families and ALL h <= h_max
    uint64_t bad = 0;
    uint64_t undetermined = 0; // some value could not be decided within budget
    double good_fraction = 0;  // good / (good + bad)
};

ScanResult theorem_scan(const construct::Construction& c, const Int& x0, const Int& x1,
                        uint64_t h_max, const Caps& caps = {});

// canonical emission: sorted construction, fixed precision, trailing newline;
// identical runs produce byte-identical files
void emit_report(const nlohmann::ordered_json& report, const std::string& path);

std::string construction_hash(const construct::Construction& c);

nlohmann::ordered_json report_to_json(const VerificationReport& r,
                                      const ExceptionalStats& stats,
                                      const ScanResult* scan = nullptr);

// The shipped fixture: a = 2, families (j,k) in {(1,1), (1,-1)}, L = 2,
// smax = 2, banks {3,11}, {5,7}, {13}, {17}; W ~ 1.9e26.
construct::Construction reference_micro_construction();
construct::Params reference_micro_params();

// %.15g rounding for report reals
double report_real(double v);

} // namespace omega_forge::harness

#endif
