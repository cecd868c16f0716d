#ifndef OMEGA_FORGE_SIEVE_HPP
#define OMEGA_FORGE_SIEVE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "omega_forge/errors.hpp"

// Analytic instruments: Mertens sums, the sums G(z)/G(xi,z)/W(z) with the
// Rankin bound, a Selberg Lambda^2 upper bound with brute-force counterpart,
// and omega-level counts in arithmetic progressions.
namespace omega_forge::sieve {

// gamma and e^gamma to more than 15 significant digits
inline constexpr double kEulerGamma = 0.577215664901532860606512090082;
inline constexpr double kExpGamma = 1.781072417990197985236504103108;

// Total weight function p -> omega(p): explicit table with a default for
// primes outside it, plus the admissibility constants A and B.
struct SieveWeight {
    std::map<uint64_t, double> table;
    double default_value = 0.0;
    double cap_A = 1.0;  // A
    double slack_B = 2.0; // B

    double at(uint64_t p) const;
    // 0 <= omega(p) <= min{A, (1 - 1/B) p}
    bool admissible_at(uint64_t p) const;

    static SieveWeight constant(double v, double A = 1.0, double B = 2.0);
    // omega(p) = 1 for p coprime to W, 0 for p | W (Lemma 2.3 weight)
    static SieveWeight unit_coprime_to(uint64_t W, double B = 2.0);
};

struct MertensReport {
    double limit = 0;
    double log_sum = 0;   // sum log p / p
    double recip_sum = 0; // sum 1/p
    double product = 0;   // prod (1 - 1/p)^{-1}
    double residual_log = 0;    // log_sum - log x  (empirical c1)
    double residual_loglog = 0; // recip_sum - log log x  (empirical c2)
    double residual_egamma = 0; // product - e^gamma log x
};

double mertens_log_sum(double x);   // x >= 2
double mertens_recip_sum(double x); // x >= 3
double mertens_product(double x);   // x >= 3
MertensReport mertens_report(double x);

// G(xi, z) = sum over squarefree d | P(z), d < xi of prod omega(p)/(p - omega(p)),
// enumerated depth-first with pruning; g_sum(z, w) = g_sum_trunc(z, z, w).
inline constexpr uint64_t kGsumNodeBudget = uint64_t(1) << 28;
double g_sum(double z, const SieveWeight& w);
double g_sum_trunc(double xi, double z, const SieveWeight& w);
// W(z) = prod_{p<z} (1 - omega(p)/p)
double w_product(double z, const SieveWeight& w);

// right side of the Rankin inequality at sigma = 1 - 1/log z
double rankin_bound(double xi, double z, const SieveWeight& w);
struct RankinCheck {
    double lhs = 0; // 1 - W(z) G(xi, z)
    double rhs = 0;
    bool holds = false;
};
RankinCheck rankin_check(double xi, double z, const SieveWeight& w);

// Selberg Lambda^2 upper bound for |{1 <= n <= x : (Wn + b, P(z)) = 1}|:
// floor(x)/G(z) + sum_{d | P(z), d < z^2, (d, W) = 1} 3^{omega(d)} with the
// weight omega(p) = [p coprime to W]. The z <= x^{1/3} hypothesis is reported
// via flags, not enforced.
struct SelbergFlags {
    bool z_in_range = true; // 2 <= z <= x^{1/3}
};
double selberg_upper_bound(double x, uint64_t W, uint64_t b, uint64_t z,
                           SelbergFlags* flags = nullptr);
uint64_t sifted_count_brute(double x, uint64_t W, uint64_t b, uint64_t z);

// cnt[v] = number of distinct primes dividing v, for all v <= limit
class OmegaTable {
public:
    explicit OmegaTable(uint64_t limit);
    unsigned at(uint64_t v) const { return counts_[v]; }
    uint64_t limit() const { return counts_.size() - 1; }

private:
    std::vector<uint8_t> counts_;
};

inline constexpr uint64_t kOmegaTableLimit = uint64_t(1) << 28;

// |{1 <= n <= x : omega(Wn + b) = k}|, exactly; builds a table when none given
uint64_t omega_level_count(uint64_t x, uint64_t W, uint64_t b, unsigned k,
                           const OmegaTable* table = nullptr);
// counts for every k at once; sums to x
std::vector<uint64_t> omega_level_histogram(uint64_t x, uint64_t W, uint64_t b,
                                            const OmegaTable* table = nullptr);

struct OmegaBoundFlags {
    bool w_in_range = true;    // W <= x^{1/2k}
    bool logx_in_range = true; // log x <= x^{1/6k}
};
// C^k x (log log x)^{k-1} / log x * W/phi(W)
double omega_level_bound(double x, uint64_t W, unsigned k, double C,
                         OmegaBoundFlags* flags = nullptr);

struct SweepPoint {
    uint64_t x = 0;
    uint64_t W = 1;
    uint64_t b = 0;
    unsigned k = 1;
};

struct FittedConstant {
    double value = 0;
    bool unconstrained = true; // no point had a positive count
    SweepPoint worst;          // point attaining the max
    std::string sweep_description;
};

// minimal C with omega_level_bound >= omega_level_count at every sweep point
FittedConstant fit_constant(const std::vector<SweepPoint>& sweep,
                            const OmegaTable* table = nullptr);

double phi_over_w(uint64_t W); // phi(W)/W for machine-size W

} // namespace omega_forge::sieve

#endif
