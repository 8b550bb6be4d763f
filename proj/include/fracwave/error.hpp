#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: parameters outside their admissible range, mismatched
/// shapes, violated model invariants. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ResolutionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ModelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SpecificationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A hypothesis of the linearised injectivity result fails (psi-hat vanishes
/// at a pole, or an eigenfunction vanishes at the observation point).
class AssumptionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failures of the numerics themselves. The CLI maps these to exit code 1.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// 1 - 2*kappa*u dropped below the degeneracy margin.
class BlowUpError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonContractionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CertificationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class MultipleRootError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fracwave
