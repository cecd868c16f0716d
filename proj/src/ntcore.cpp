#include "omega_forge/ntcore.hpp"

#include <algorithm>
#include <map>

namespace omega_forge::ntcore {

Int pow_ui(const Int& base, uint64_t exp) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

Int powm(const Int& base, const Int& exp, const Int& mod) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return r;
}

Int gcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

Int invert(const Int& a, const Int& mod) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw DomainError("invert: argument not invertible modulo " + mod.get_str());
    return r;
}

Int Factorization::value() const {
    Int v = cofactor;
    for (const auto& e : entries)
        v *= pow_ui(e.prime, e.exponent);
    return v;
}

bool Factorization::valid() const {
    for (size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].exponent < 1)
            return false;
        if (i > 0 && entries[i - 1].prime >= entries[i].prime)
            return false;
        if (!is_prime(entries[i].prime))
            return false;
    }
    return true;
}

namespace {

bool miller_rabin_witness(const Int& n, const Int& a, const Int& d, unsigned s) {
    Int x = powm(a, d, n);
    if (x == 1 || x == n - 1)
        return true;
    for (unsigned i = 1; i < s; ++i) {
        x = (x * x) % n;
        if (x == n - 1)
            return true;
    }
    return false;
}

} // namespace

bool is_prime(const Int& n) {
    if (n < 2)
        return false;
    for (uint64_t p : kPrimalityWitnesses) {
        if (mpz_cmp_ui(n.get_mpz_t(), p) == 0)
            return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p))
            return false;
    }
    Int d = n - 1;
    unsigned s = 0;
    while (mpz_even_p(d.get_mpz_t())) {
        d >>= 1;
        ++s;
    }
    // The listed witnesses are deterministic for n < 2^64 and are reused as
    // the fixed probabilistic set above (see kPrimalityWitnesses).
    for (uint64_t a : kPrimalityWitnesses) {
        if (!miller_rabin_witness(n, Int(static_cast<unsigned long>(a)), d, s))
            return false;
    }
    return true;
}

std::vector<uint64_t> sieve_primes(uint64_t limit) {
    if (limit > kSievePrimesLimit)
        throw BudgetExceeded("sieve_primes: limit exceeds memory budget");
    std::vector<uint64_t> primes;
    if (limit < 2)
        return primes;
    std::vector<bool> composite(limit + 1, false);
    for (uint64_t i = 2; i <= limit; ++i) {
        if (composite[i])
            continue;
        primes.push_back(i);
        for (uint64_t j = i * i; j <= limit; j += i)
            composite[j] = true;
    }
    return primes;
}

namespace {

// Brent's cycle variant of Pollard rho; returns a nontrivial factor of n
// (composite, odd, not a perfect power handled by caller) or 0 when the
// iteration budget runs dry.
Int pollard_brent(const Int& n, uint64_t& iterations_left) {
    for (unsigned long c = 1;; ++c) {
        Int x = 2, y = 2, d = 1, q = 1, ys = 0;
        uint64_t r = 1;
        const uint64_t batch = 128;
        auto step = [&](Int& v) { v = (v * v + c) % n; };
        while (d == 1) {
            x = y;
            for (uint64_t i = 0; i < r; ++i)
                step(y);
            for (uint64_t k = 0; k < r && d == 1; k += batch) {
                ys = y;
                uint64_t lim = std::min(batch, r - k);
                if (lim > iterations_left) {
                    iterations_left = 0;
                    return 0;
                }
                iterations_left -= lim;
                for (uint64_t i = 0; i < lim; ++i) {
                    step(y);
                    Int diff = x - y;
                    if (diff < 0)
                        diff = -diff;
                    q = (q * diff) % n;
                }
                d = gcd(q, n);
            }
            r <<= 1;
        }
        if (d == n) {
            // backtrack one step at a time
            d = 1;
            while (d == 1) {
                if (iterations_left == 0)
                    return 0;
                --iterations_left;
                step(ys);
                Int diff = x - ys;
                if (diff < 0)
                    diff = -diff;
                d = gcd(diff, n);
            }
        }
        if (d != n)
            return d;
        // cycle collapsed onto n itself; retry with the next polynomial
        if (iterations_left == 0)
            return 0;
    }
}

} // namespace

Factorization factorize(const Int& n, const FactorBudget& budget) {
    if (n == 0)
        throw DomainError("factorize: n = 0");
    if (n < 0)
        throw DomainError("factorize: n < 0");
    std::map<Int, unsigned> found;
    Int rest = n;

    for (uint64_t p = 2; p <= budget.trial_bound && rest > 1; p += (p == 2 ? 1 : 2)) {
        if (mpz_cmp_ui(rest.get_mpz_t(), p * p) < 0) {
            found[rest] += 1;
            rest = 1;
            break;
        }
        while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
            found[Int(static_cast<unsigned long>(p))] += 1;
            mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
        }
    }

    uint64_t iterations_left = budget.rho_iterations;
    std::vector<std::pair<Int, unsigned>> stack; // (composite cofactor, multiplicity)
    Int incomplete = 1;
    if (rest > 1)
        stack.push_back({rest, 1});
    while (!stack.empty()) {
        auto [m, mult] = stack.back();
        stack.pop_back();
        if (is_prime(m)) {
            found[m] += mult;
            continue;
        }
        unsigned long k = mpz_perfect_power_p(m.get_mpz_t()) ? 2 : 0;
        if (k) {
            // reduce perfect powers to their root; rho stalls on them
            for (unsigned long e = 2; e <= mpz_sizeinbase(m.get_mpz_t(), 2); ++e) {
                Int root;
                if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), e) != 0) {
                    stack.push_back({root, mult * static_cast<unsigned>(e)});
                    k = 1;
                    break;
                }
            }
            if (k == 1)
                continue;
        }
        Int d = pollard_brent(m, iterations_left);
        if (d == 0) {
            for (unsigned i = 0; i < mult; ++i)
                incomplete *= m;
            continue;
        }
        stack.push_back({d, mult});
        stack.push_back({m / d, mult});
    }

    Factorization f;
    for (const auto& [p, e] : found)
        f.entries.push_back({p, e});
    if (incomplete > 1) {
        f.cofactor = incomplete;
        f.complete = false;
    }
    return f;
}

unsigned omega(const Int& n, const FactorBudget& budget) {
    if (n == 0)
        throw DomainError("omega: n = 0");
    Int m = abs(n);
    if (m == 1)
        return 0;
    Factorization f = factorize(m, budget);
    if (!f.complete)
        throw FactorizationBudgetExceeded("omega: incomplete factorization of " + m.get_str());
    return static_cast<unsigned>(f.entries.size());
}

Int euler_phi(const Factorization& f) {
    Int phi = 1;
    for (const auto& e : f.entries)
        phi *= pow_ui(e.prime, e.exponent - 1) * (e.prime - 1);
    return phi;
}

Int mult_order(const Int& a, const Int& q, const Factorization& phi_factors) {
    if (gcd(a, q) != 1)
        throw DomainError("mult_order: gcd(a, q) != 1");
    // start at phi(q) and divide down through its prime divisors
    Int ord = 1;
    for (const auto& e : phi_factors.entries)
        ord *= pow_ui(e.prime, e.exponent);
    if (powm(a % q, ord, q) != 1)
        throw DomainError("mult_order: phi_factors do not annihilate a");
    for (const auto& e : phi_factors.entries) {
        for (unsigned i = 0; i < e.exponent; ++i) {
            Int trial = ord / e.prime;
            if (mpz_divisible_p(ord.get_mpz_t(), e.prime.get_mpz_t()) &&
                powm(a % q, trial, q) == 1)
                ord = trial;
            else
                break;
        }
    }
    return ord;
}

namespace {

int moebius(uint64_t n) {
    int mu = 1;
    for (uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0)
                return 0;
            mu = -mu;
        }
    }
    if (n > 1)
        mu = -mu;
    return mu;
}

std::vector<uint64_t> divisors(uint64_t m) {
    std::vector<uint64_t> ds;
    for (uint64_t d = 1; d * d <= m; ++d) {
        if (m % d == 0) {
            ds.push_back(d);
            if (d != m / d)
                ds.push_back(m / d);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

} // namespace

Int cyclotomic_value(uint64_t m, const Int& a) {
    if (m == 0)
        throw DomainError("cyclotomic_value: m = 0");
    Int num = 1, den = 1;
    for (uint64_t d : divisors(m)) {
        int mu = moebius(d);
        if (mu == 0)
            continue;
        Int term = pow_ui(a, m / d) - 1;
        (mu > 0 ? num : den) *= term;
    }
    Int r;
    mpz_divexact(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return r;
}

namespace {

std::vector<uint64_t> prime_divisors_u64(uint64_t m) {
    std::vector<uint64_t> ps;
    for (uint64_t p = 2; p * p <= m; ++p) {
        if (m % p == 0) {
            ps.push_back(p);
            while (m % p == 0)
                m /= p;
        }
    }
    if (m > 1)
        ps.push_back(m);
    return ps;
}

} // namespace

Int primitive_prime_factor(const Int& a, uint64_t m, const FactorBudget& budget) {
    if (a < 2)
        throw DomainError("primitive_prime_factor: a < 2");
    if (m == 0)
        throw DomainError("primitive_prime_factor: m = 0");
    Int phi_m = cyclotomic_value(m, a);
    if (phi_m < 0)
        phi_m = -phi_m;
    if (phi_m <= 1)
        throw NoPrimitivePrime("no primitive prime for a = " + a.get_str() +
                               ", m = " + std::to_string(m));
    Factorization f = factorize(phi_m, budget);
    if (!f.complete)
        throw FactorizationBudgetExceeded("primitive_prime_factor: cannot factor Phi_" +
                                          std::to_string(m) + "(" + a.get_str() + ")");
    const auto mps = prime_divisors_u64(m);
    Int best = 0;
    for (const auto& e : f.entries) {
        const Int& q = e.prime;
        if (gcd(a, q) != 1)
            continue;
        // q | Phi_m(a) | a^m - 1 gives ord(a mod q) | m, so the order is m
        // exactly when no proper divisor exponent m/p annihilates a
        bool full_order = true;
        for (uint64_t p : mps) {
            Int sub = Int(static_cast<unsigned long>(m / p));
            if (powm(a % q, sub, q) == 1) {
                full_order = false;
                break;
            }
        }
        if (full_order && q > best)
            best = q;
    }
    if (best == 0)
        throw NoPrimitivePrime("no primitive prime for a = " + a.get_str() +
                               ", m = " + std::to_string(m));
    return best;
}

std::pair<Int, Int> crt(const CrtSystem& system) {
    Int r = 0, m = 1;
    for (const auto& c : system.congruences) {
        if (c.modulus < 1)
            throw DomainError("crt: modulus < 1");
        if (c.residue < 0 || c.residue >= c.modulus)
            throw DomainError("crt: residue out of range");
        Int g = gcd(m, c.modulus);
        Int diff = c.residue - r;
        if (!mpz_divisible_p(diff.get_mpz_t(), g.get_mpz_t()))
            throw CrtConflict("crt: inconsistent congruences");
        Int m2 = c.modulus / g;
        if (m2 > 1) {
            Int t = (((diff / g) % m2) * invert((m / g) % m2, m2)) % m2;
            if (t < 0)
                t += m2;
            r += m * t;
        }
        m *= m2;
        r %= m;
        if (r < 0)
            r += m;
    }
    return {r, m};
}

} // namespace omega_forge::ntcore
