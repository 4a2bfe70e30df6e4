#pragma once

#include <stdexcept>
#include <string>

namespace qdyn {

/// Operand dimensions are incompatible with the requested operation.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value violates a mathematical precondition (non-Hermitian, negative
/// probability, non-orthonormal basis, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// An algorithm failed to meet its numerical contract.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qdyn
