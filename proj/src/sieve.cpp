#include "omega_forge/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omega_forge/ntcore.hpp"

namespace omega_forge::sieve {

namespace {

// Kahan compensated summation
struct KahanSum {
    double sum = 0, c = 0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

std::vector<uint64_t> primes_below(double z) {
    if (z < 2)
        return {};
    // primes p < z, strict
    uint64_t limit = static_cast<uint64_t>(std::ceil(z)) ;
    auto ps = ntcore::sieve_primes(limit);
    while (!ps.empty() && static_cast<double>(ps.back()) >= z)
        ps.pop_back();
    return ps;
}

std::vector<uint64_t> primes_upto(double x) {
    if (x < 2)
        return {};
    return ntcore::sieve_primes(static_cast<uint64_t>(std::floor(x)));
}

} // namespace

double SieveWeight::at(uint64_t p) const {
    auto it = table.find(p);
    return it == table.end() ? default_value : it->second;
}

bool SieveWeight::admissible_at(uint64_t p) const {
    double w = at(p);
    return w >= 0 && w <= std::min(cap_A, (1.0 - 1.0 / slack_B) * static_cast<double>(p));
}

SieveWeight SieveWeight::constant(double v, double A, double B) {
    SieveWeight w;
    w.default_value = v;
    w.cap_A = A;
    w.slack_B = B;
    return w;
}

SieveWeight SieveWeight::unit_coprime_to(uint64_t W, double B) {
    SieveWeight w;
    w.default_value = 1.0;
    w.cap_A = 1.0;
    w.slack_B = B;
    for (uint64_t p = 2; p <= W; ++p)
        if (W % p == 0) {
            w.table[p] = 0.0;
            while (W % p == 0)
                W /= p;
        }
    return w;
}

double mertens_log_sum(double x) {
    if (x < 2)
        throw DomainError("mertens_log_sum: x < 2");
    KahanSum s;
    for (uint64_t p : primes_upto(x))
        s.add(std::log(static_cast<double>(p)) / static_cast<double>(p));
    return s.sum;
}

double mertens_recip_sum(double x) {
    if (x < 3)
        throw DomainError("mertens_recip_sum: x < 3");
    KahanSum s;
    for (uint64_t p : primes_upto(x))
        s.add(1.0 / static_cast<double>(p));
    return s.sum;
}

double mertens_product(double x) {
    if (x < 3)
        throw DomainError("mertens_product: x < 3");
    // accumulate in log space to keep the product stable
    KahanSum s;
    for (uint64_t p : primes_upto(x))
        s.add(-std::log1p(-1.0 / static_cast<double>(p)));
    return std::exp(s.sum);
}

MertensReport mertens_report(double x) {
    MertensReport r;
    r.limit = x;
    r.log_sum = mertens_log_sum(x);
    r.recip_sum = mertens_recip_sum(x);
    r.product = mertens_product(x);
    r.residual_log = r.log_sum - std::log(x);
    r.residual_loglog = r.recip_sum - std::log(std::log(x));
    r.residual_egamma = r.product - kExpGamma * std::log(x);
    return r;
}

double g_sum_trunc(double xi, double z, const SieveWeight& w) {
    if (z < 2)
        throw DomainError("g_sum: z < 2");
    if (xi < z)
        throw DomainError("g_sum: xi < z");
    auto ps = primes_below(z);
    for (uint64_t p : ps)
        if (!w.admissible_at(p))
            throw DomainError("g_sum: weight not admissible at p = " + std::to_string(p));
    // drop primes with omega(p) = 0: they contribute no d
    std::vector<uint64_t> active;
    for (uint64_t p : ps)
        if (w.at(p) > 0)
            active.push_back(p);
    KahanSum sum;
    uint64_t nodes = 0;
    auto rec = [&](auto&& self, size_t idx, double prod, double term) -> void {
        if (++nodes > kGsumNodeBudget)
            throw BudgetExceeded("g_sum: enumeration node budget exceeded");
        sum.add(term);
        for (size_t i = idx; i < active.size(); ++i) {
            double p = static_cast<double>(active[i]);
            if (prod * p >= xi)
                break;
            double wp = w.at(active[i]);
            self(self, i + 1, prod * p, term * wp / (p - wp));
        }
    };
    rec(rec, 0, 1.0, 1.0);
    return sum.sum;
}

double g_sum(double z, const SieveWeight& w) {
    return g_sum_trunc(z, z, w);
}

double w_product(double z, const SieveWeight& w) {
    if (z < 2)
        throw DomainError("w_product: z < 2");
    KahanSum s;
    for (uint64_t p : primes_below(z)) {
        if (!w.admissible_at(p))
            throw DomainError("w_product: weight not admissible at p = " + std::to_string(p));
        s.add(std::log1p(-w.at(p) / static_cast<double>(p)));
    }
    return std::exp(s.sum);
}

double rankin_bound(double xi, double z, const SieveWeight& w) {
    if (z < 3)
        throw DomainError("rankin_bound: z < 3");
    if (xi < z)
        throw DomainError("rankin_bound: xi < z");
    double sigma = 1.0 - 1.0 / std::log(z);
    KahanSum s;
    for (uint64_t p : primes_below(z)) {
        double pd = static_cast<double>(p);
        s.add((std::pow(pd, -sigma) - 1.0 / pd) * w.at(p));
    }
    return std::exp(-(1.0 - sigma) * std::log(xi) + s.sum);
}

RankinCheck rankin_check(double xi, double z, const SieveWeight& w) {
    RankinCheck c;
    c.lhs = 1.0 - w_product(z, w) * g_sum_trunc(xi, z, w);
    c.rhs = rankin_bound(xi, z, w);
    c.holds = c.lhs <= c.rhs;
    return c;
}

double selberg_upper_bound(double x, uint64_t W, uint64_t b, uint64_t z, SelbergFlags* flags) {
    if (x < 1 || W < 1 || z < 2)
        throw DomainError("selberg_upper_bound: bad arguments");
    if (std::gcd(W, b) != 1)
        throw DomainError("selberg_upper_bound: gcd(W, b) != 1");
    if (flags)
        flags->z_in_range = static_cast<double>(z) <= std::cbrt(x);
    SieveWeight w = SieveWeight::unit_coprime_to(W);
    double main_term = std::floor(x) / g_sum(static_cast<double>(z), w);
    // remainder: sum of 3^{omega(d)} over squarefree d | P(z), d < z^2, (d,W)=1
    auto ps = primes_below(static_cast<double>(z));
    std::vector<uint64_t> active;
    for (uint64_t p : ps)
        if (W % p != 0)
            active.push_back(p);
    double xi = static_cast<double>(z) * static_cast<double>(z);
    KahanSum rem;
    uint64_t nodes = 0;
    auto rec = [&](auto&& self, size_t idx, double prod, double three_pow) -> void {
        if (++nodes > kGsumNodeBudget)
            throw BudgetExceeded("selberg_upper_bound: node budget exceeded");
        rem.add(three_pow);
        for (size_t i = idx; i < active.size(); ++i) {
            double p = static_cast<double>(active[i]);
            if (prod * p >= xi)
                break;
            self(self, i + 1, prod * p, three_pow * 3.0);
        }
    };
    rec(rec, 0, 1.0, 1.0);
    rem.add(-1.0); // d = 1 contributes no remainder term
    return main_term + rem.sum;
}

uint64_t sifted_count_brute(double x, uint64_t W, uint64_t b, uint64_t z) {
    if (x < 1 || W < 1 || z < 2)
        throw DomainError("sifted_count_brute: bad arguments");
    if (std::gcd(W, b) != 1)
        throw DomainError("sifted_count_brute: gcd(W, b) != 1");
    uint64_t n_max = static_cast<uint64_t>(std::floor(x));
    std::vector<bool> sifted(n_max + 1, false);
    for (uint64_t p : primes_below(static_cast<double>(z))) {
        if (W % p == 0)
            continue; // gcd(W, b) = 1 makes Wn + b coprime to p | W
        // n with W n + b == 0 (mod p)
        uint64_t winv = 1;
        {
            // modular inverse of W mod p by Fermat
            uint64_t base = W % p, e = p - 2, r = 1;
            while (e) {
                if (e & 1)
                    r = r * base % p;
                base = base * base % p;
                e >>= 1;
            }
            winv = r;
        }
        uint64_t n0 = (p - b % p) % p * winv % p;
        if (n0 == 0)
            n0 = p;
        for (uint64_t n = n0; n <= n_max; n += p)
            sifted[n] = true;
    }
    uint64_t count = 0;
    for (uint64_t n = 1; n <= n_max; ++n)
        if (!sifted[n])
            ++count;
    return count;
}

OmegaTable::OmegaTable(uint64_t limit) {
    if (limit > kOmegaTableLimit)
        throw BudgetExceeded("OmegaTable: limit exceeds memory budget");
    counts_.assign(limit + 1, 0);
    for (uint64_t p = 2; p <= limit; ++p) {
        if (counts_[p] != 0)
            continue; // composite, already touched by a smaller prime
        for (uint64_t m = p; m <= limit; m += p)
            ++counts_[m];
    }
}

uint64_t omega_level_count(uint64_t x, uint64_t W, uint64_t b, unsigned k,
                           const OmegaTable* table) {
    uint64_t top = W * x + b;
    OmegaTable local(table ? 0 : top);
    const OmegaTable& t = table ? *table : local;
    if (t.limit() < top)
        throw DomainError("omega_level_count: table too small");
    uint64_t count = 0;
    for (uint64_t n = 1; n <= x; ++n)
        if (t.at(W * n + b) == k)
            ++count;
    return count;
}

std::vector<uint64_t> omega_level_histogram(uint64_t x, uint64_t W, uint64_t b,
                                            const OmegaTable* table) {
    uint64_t top = W * x + b;
    OmegaTable local(table ? 0 : top);
    const OmegaTable& t = table ? *table : local;
    if (t.limit() < top)
        throw DomainError("omega_level_histogram: table too small");
    std::vector<uint64_t> hist;
    for (uint64_t n = 1; n <= x; ++n) {
        unsigned k = t.at(W * n + b);
        if (k >= hist.size())
            hist.resize(k + 1, 0);
        ++hist[k];
    }
    return hist;
}

double phi_over_w(uint64_t W) {
    double r = 1.0;
    for (uint64_t p = 2; p * p <= W; ++p)
        if (W % p == 0) {
            r *= 1.0 - 1.0 / static_cast<double>(p);
            while (W % p == 0)
                W /= p;
        }
    if (W > 1)
        r *= 1.0 - 1.0 / static_cast<double>(W);
    return r;
}

double omega_level_bound(double x, uint64_t W, unsigned k, double C, OmegaBoundFlags* flags) {
    if (x < 3 || k < 1)
        throw DomainError("omega_level_bound: x < 3 or k < 1");
    if (flags) {
        flags->w_in_range = static_cast<double>(W) <= std::pow(x, 1.0 / (2.0 * k));
        flags->logx_in_range = std::log(x) <= std::pow(x, 1.0 / (6.0 * k));
    }
    return std::pow(C, k) * x * std::pow(std::log(std::log(x)), k - 1.0) / std::log(x) /
           phi_over_w(W);
}

FittedConstant fit_constant(const std::vector<SweepPoint>& sweep, const OmegaTable* table) {
    if (sweep.empty())
        throw DomainError("fit_constant: empty sweep");
    FittedConstant fit;
    fit.sweep_description = std::to_string(sweep.size()) + " points";
    for (const auto& pt : sweep) {
        uint64_t count = omega_level_count(pt.x, pt.W, pt.b, pt.k, table);
        if (count == 0)
            continue; // unconstrained point
        double x = static_cast<double>(pt.x);
        double denom = x * std::pow(std::log(std::log(x)), pt.k - 1.0) / std::log(x) /
                       phi_over_w(pt.W);
        double c = std::pow(static_cast<double>(count) / denom, 1.0 / pt.k);
        if (fit.unconstrained || c > fit.value) {
            fit.value = c;
            fit.worst = pt;
            fit.unconstrained = false;
        }
    }
    return fit;
}

} // namespace omega_forge::sieve
