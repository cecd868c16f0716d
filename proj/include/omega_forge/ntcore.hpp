#ifndef OMEGA_FORGE_NTCORE_HPP
#define OMEGA_FORGE_NTCORE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "omega_forge/errors.hpp"

// Arbitrary-precision number-theoretic primitives: primes, factorization,
// omega, Euler phi, multiplicative order, CRT, cyclotomic values and
// primitive prime factors. All functions are pure.
namespace omega_forge::ntcore {

using Int = mpz_class;

struct FactorEntry {
    Int prime;
    unsigned exponent = 1;

    friend bool operator==(const FactorEntry&, const FactorEntry&) = default;
};

// Multiset of prime-exponent pairs, primes strictly increasing. When the
// factoring budget ran out, `complete` is false and `cofactor` holds the
// unfactored (composite) remainder; otherwise cofactor == 1.
struct Factorization {
    std::vector<FactorEntry> entries;
    Int cofactor = 1;
    bool complete = true;

    // product of prime^exponent over entries, times the cofactor
    Int value() const;
    // invariants: ascending primes, exponents >= 1, every prime passes is_prime
    bool valid() const;

    friend bool operator==(const Factorization&, const Factorization&) = default;
};

struct FactorBudget {
    uint64_t trial_bound = 100000;     // trial division up to this bound
    uint64_t rho_iterations = 1u << 26; // total Pollard rho iteration cap
};

// Miller-Rabin witness sets. The small set is deterministic below 2^64;
// the same fixed witnesses are reused (probabilistically) above, recorded
// here so reports can cite them.
inline constexpr uint64_t kPrimalityWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

bool is_prime(const Int& n);

// Eratosthenes; throws BudgetExceeded past kSievePrimesLimit.
inline constexpr uint64_t kSievePrimesLimit = uint64_t(1) << 31;
std::vector<uint64_t> sieve_primes(uint64_t limit);

// Trial division then Pollard rho (Brent). n >= 1; n == 0 -> DomainError.
// On budget exhaustion returns the partial factorization flagged incomplete.
Factorization factorize(const Int& n, const FactorBudget& budget = {});

// number of distinct prime factors of |n|; omega(+-1) = 0, n = 0 -> DomainError
unsigned omega(const Int& n, const FactorBudget& budget = {});

Int euler_phi(const Factorization& f);

// least m >= 1 with a^m == 1 (mod q), descending from phi(q) through the
// prime divisors given in phi_factors; gcd(a, q) != 1 -> DomainError
Int mult_order(const Int& a, const Int& q, const Factorization& phi_factors);

struct Congruence {
    Int residue;
    Int modulus;
};

struct CrtSystem {
    std::vector<Congruence> congruences;
};

// least nonnegative residue modulo lcm of the moduli; supports non-coprime
// moduli where the congruences agree, else throws CrtConflict
std::pair<Int, Int> crt(const CrtSystem& system);

// Phi_m(a), exactly, via prod_{d|m} (a^{m/d} - 1)^{mu(d)}
Int cyclotomic_value(uint64_t m, const Int& a);

// Largest prime q with mult_order(a, q) = m, found by factoring Phi_m(a) and
// discarding divisors of smaller order. Throws NoPrimitivePrime at the
// Zsygmondy exceptions, FactorizationBudgetExceeded on a hard cofactor.
Int primitive_prime_factor(const Int& a, uint64_t m, const FactorBudget& budget = {});

// convenience wrappers around the mpz_* calls
Int pow_ui(const Int& base, uint64_t exp);
Int powm(const Int& base, const Int& exp, const Int& mod);
Int gcd(const Int& a, const Int& b);
Int invert(const Int& a, const Int& mod); // DomainError when not invertible

} // namespace omega_forge::ntcore

#endif
