#pragma once

#include <stdexcept>
#include <string>

namespace wfem {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid polygon or mesh geometry.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Point lookup outside the meshed domain.
class LocationError : public Error {
public:
  using Error::Error;
};

/// Argument outside the admissible range of an operation.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Quadrature produced a non-finite value.
class IntegrationError : public Error {
public:
  using Error::Error;
};

/// Subdivision toward a singular point did not settle: the integrand is
/// (numerically) not integrable.
class DivergenceError : public IntegrationError {
public:
  using IntegrationError::IntegrationError;
};

/// Linear or nonlinear solver failed to reach its tolerance.
class SolverError : public Error {
public:
  using Error::Error;
};

/// Malformed configuration or schema violation.
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace wfem
