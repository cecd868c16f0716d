#ifndef OMEGA_FORGE_COVER_HPP
#define OMEGA_FORGE_COVER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omega_forge/construct.hpp"

// Exact enumeration of the exceptional sets H_r and their union, via the
// pigeonhole counts c_s(h) = |{t : h == s-1 (mod p_t)}|: h is covered by
// some subset I with |I| = s exactly when c_s(h) >= s. Correct because all
// bank primes exceed smax, so the residue s-1 is reduced already.
namespace omega_forge::cover {

struct Witness {
    unsigned size = 0;                // s = |I|
    std::vector<unsigned> indices;    // 1-based bank indices, ascending
};

// witness selection: smallest s first, then smallest indices
std::optional<Witness> covered(uint64_t h, const construct::PrimeBank& bank, unsigned smax);

struct ExceptionalSet {
    std::string label;  // label string or "global"
    uint64_t h_max = 0;
    std::vector<uint64_t> members; // ascending h in [0, h_max] not covered

    double density() const {
        return static_cast<double>(members.size()) / (static_cast<double>(h_max) + 1.0);
    }
};

ExceptionalSet exceptional_set(const construct::PrimeBank& bank, unsigned smax,
                               uint64_t h_max);
ExceptionalSet union_exceptional(const std::vector<ExceptionalSet>& sets);

struct DensityRow {
    std::string label;
    size_t bank_size = 0;
    double product_value = 0;
    double density = 0;
};

struct DensityReport {
    std::vector<DensityRow> rows;       // sorted by product_value
    bool nonincreasing = true;          // density trend across rows
};

DensityReport density_report(const std::vector<construct::PrimeBank>& banks, unsigned smax,
                             uint64_t h_max);

// Lemma 2.5 pigeonhole count: |{t : (h mod p_t) < smax}|; below smax^2 for
// every exceptional h
unsigned pigeonhole_count(uint64_t h, const construct::PrimeBank& bank, unsigned smax);

} // namespace omega_forge::cover

#endif
