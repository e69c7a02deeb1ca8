#pragma once

#include <stdexcept>
#include <string>

namespace imcmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Measures defined on different state spaces were combined.
struct SpaceMismatchError : Error {
    using Error::Error;
};

// A kernel row failed the stochasticity check (negative entry or row sum off).
struct InvalidKernelError : Error {
    using Error::Error;
};

// mu(G) = 0: the Boltzmann-Gibbs reweighting has no mass to normalize.
struct DegeneratePotentialError : Error {
    using Error::Error;
};

// Enumeration guard exceeded (path counts, product spaces).
struct TooLargeError : Error {
    using Error::Error;
};

// Multi-level chain state out of sync (occupation totals disagree).
struct DesyncError : Error {
    using Error::Error;
};

// No contracting kernel power found within the search budget.
struct NonErgodicError : Error {
    using Error::Error;
};

// Proposal has zero mass where the target reference kernel is positive.
struct AbsoluteContinuityError : Error {
    using Error::Error;
};

struct InvalidParameterError : Error {
    using Error::Error;
};

struct InvalidDataError : Error {
    using Error::Error;
};

struct DependencyError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace imcmc
