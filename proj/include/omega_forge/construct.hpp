#ifndef OMEGA_FORGE_CONSTRUCT_HPP
#define OMEGA_FORGE_CONSTRUCT_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "omega_forge/ntcore.hpp"

// Staged prime-bank selection, primitive-prime cover entries and CRT
// assembly of the moduli W_r, residues b_r and the global (W, b).
namespace omega_forge::construct {

using ntcore::Int;

inline constexpr const char* kToolVersion = "omega-forge 0.1.0";

// one element of the index set R = {(a, j, k, l)}
struct Label {
    int a = 2; // base, 2 <= a <= K
    int j = 1; // 1 <= j <= K
    int k = 1; // k != 0, |k| <= K
    int l = 1; // copy index, 1 <= l <= L

    auto operator<=>(const Label&) const = default;
    std::string str() const;
};

// How one bank's primes are obtained: an explicit list, or a greedy scan of
// [interval_lo, interval_hi] toward a product target.
struct BankSpec {
    std::vector<uint64_t> primes; // explicit list, empty when interval-driven
    std::optional<std::pair<uint64_t, uint64_t>> interval;
    std::optional<std::pair<double, double>> target; // for prod (1 - 1/p)^{-1}
};

enum class Mode { paper_faithful, scaled };

struct Params {
    Mode mode = Mode::scaled;
    int K = 2;
    double epsilon = 0.1;
    // paper-faithful mode: everything is derived from x (in log space)
    double x = 0;
    // scaled mode overrides
    int L = 1;
    unsigned smax = 1; // role of 2ML^2: 1 <= |I| <= smax
    uint64_t h_max = 0;
    bool skip_no_primitive = false; // skip subsets hitting Zsygmondy exceptions
    std::vector<std::pair<Label, BankSpec>> labels;
};

// L, Q (as log Q), M derived from x in paper-faithful mode
struct DerivedParams {
    double L = 0;
    double log_q = 0;
    double M = 0;
};
DerivedParams derive_params(const Params& p);

// the prime interval for stage a, computed in log space only
struct IntervalSchedule {
    double exp_lo = 0; // interval = [exp((log Q)^exp_lo), exp((log Q)^exp_hi)]
    double exp_hi = 0;
    double log_lo = 0; // log of the interval endpoints
    double log_hi = 0;
    bool infeasible = false; // upper endpoint beyond the enumerable prime range
};
IntervalSchedule interval_schedule(const Params& p, int a);

struct PrimeBank {
    Label label;
    std::vector<uint64_t> primes; // ascending, all > smax, globally distinct
    double product_value = 1.0;   // prod (1 - 1/p)^{-1}
};

// one cover triple (I, m = prod_{t in I} p_t, q = primitive prime of a^m - 1)
struct CoverEntry {
    Label label;
    std::vector<unsigned> index_set; // 1-based indices into the bank, ascending
    Int m;
    Int q;
    unsigned target_exponent = 0; // |I| - 1
};

struct LabelResult {
    Label label;
    Int modulus; // W_r = prod q over this label's entries
    Int residue; // b_r with b_r j + a^{|I|-1} k == 0 (mod q) for each entry
};

struct Construction {
    Params params;
    std::vector<PrimeBank> banks;
    std::vector<CoverEntry> entries;
    std::vector<LabelResult> per_label;
    Int modulus; // W
    Int residue; // b
    Int gcd_wb;  // gcd(W, b), reported rather than assumed
    std::string tool_version = kToolVersion;

    const PrimeBank* bank_for(const Label& l) const;
    std::vector<const CoverEntry*> entries_for(const Label& l) const;
    // distinct (a, j, k) families present, each with its max l
    std::vector<std::pair<Label, int>> families() const;

    // throws on any violated invariant
    void validate() const;
};

// Greedy smallest-first selection of unused primes in [lo, hi] that avoid
// p | q' - 1 for every earlier-stage entry q', until the running product
// prod (1 - 1/p)^{-1} reaches target_lo. Overshooting target_hi or running
// out of primes is an error.
PrimeBank select_prime_bank(const Label& label, uint64_t lo, uint64_t hi,
                            const std::vector<CoverEntry>& forbidden, double target_lo,
                            double target_hi, std::set<uint64_t>& used);

// one entry per subset I with 1 <= |I| <= min(smax, T_r)
std::vector<CoverEntry> build_cover_entries(const PrimeBank& bank, int a, unsigned smax,
                                            bool skip_no_primitive = false,
                                            const ntcore::FactorBudget& budget = {});

LabelResult assemble_label(const std::vector<CoverEntry>& entries, int j, int k, int a);

Construction assemble_global(const Params& params, std::vector<PrimeBank> banks,
                             std::vector<CoverEntry> entries,
                             std::vector<LabelResult> per_label);

// full pipeline: stage banks by ascending a, build entries, assemble
Construction build(const Params& params);

// artifact file (JSON, big integers as decimal strings); byte-stable
nlohmann::ordered_json to_json(const Construction& c);
Construction construction_from_json(const nlohmann::json& j);
void save(const Construction& c, const std::string& path);
Construction load(const std::string& path);

Params params_from_json(const nlohmann::json& j);
nlohmann::ordered_json params_to_json(const Params& p);

} // namespace omega_forge::construct

#endif
