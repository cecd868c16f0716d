#ifndef OMEGA_FORGE_ERRORS_HPP
#define OMEGA_FORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace omega_forge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// invalid argument for a pure math operation (n = 0, gcd != 1, ...)
struct DomainError : Error {
    using Error::Error;
};

// an enumeration or sieve exceeded its configured memory/node budget
struct BudgetExceeded : Error {
    using Error::Error;
};

// factoring effort exceeded the configured iteration cap
struct FactorizationBudgetExceeded : Error {
    using Error::Error;
};

// a CRT system is inconsistent
struct CrtConflict : Error {
    using Error::Error;
};

// a^m - 1 has no primitive prime factor (Zsygmondy exception)
struct NoPrimitivePrime : Error {
    using Error::Error;
};

// prime interval exhausted before the bank product reached its target
struct InsufficientPrimes : Error {
    using Error::Error;
};

// bank product jumped past the upper target in one step
struct TargetOvershoot : Error {
    using Error::Error;
};

// label assembly hit an impossible congruence (q | j, duplicate q)
struct ConstructionConflict : Error {
    using Error::Error;
};

// two cover entries share the same prime q
struct DistinctnessViolation : Error {
    using Error::Error;
};

// a witness prime failed to divide n*j + a^h*k; signals a construction bug
struct DivisibilityViolation : Error {
    using Error::Error;
};

// the verification window contains no member of the residue class
struct EmptyWindow : Error {
    using Error::Error;
};

// malformed config or artifact file
struct ConfigError : Error {
    using Error::Error;
};

} // namespace omega_forge

#endif
