#pragma once

#include <stdexcept>
#include <string>

namespace twlp {

// Bad indices, patterns that leave a root path, malformed decompositions.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite input values.
struct ValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Factorization breakdown (non-positive pivot, failed downdate).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point outside a barrier's domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver-level failures: potential blowup, iteration cap, bad initialization.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files; message carries line:col.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace twlp
