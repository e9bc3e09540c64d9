#pragma once

#include <stdexcept>
#include <string>

namespace coexist
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// A (D, M) state or composition violates range or parity constraints.
class InvalidState : public Error
{
  public:
    using Error::Error;
};

/// Argument outside the domain of a formula (singular point, radicand < 0, ...).
class DomainError : public Error
{
  public:
    using Error::Error;
};

/// Deterministic flow left the triangle or started at a fixed point.
class IntegrationError : public Error
{
  public:
    using Error::Error;
};

/// Numerical quadrature hit a coefficient singularity.
class QuadratureError : public Error
{
  public:
    using Error::Error;
};

/// A simulation reached its event cap before stopping.
class TruncatedRun : public Error
{
  public:
    using Error::Error;
};

/// Malformed user configuration (CLI flags, JSON config).
class ConfigError : public Error
{
  public:
    using Error::Error;
};

}  // namespace coexist
