// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_ERRORS_HPP
#define RWGCFIE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rwgcfie
{

// Base class for every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A requested size would exceed a hard memory guard.
class ResourceLimitError : public Error
{
public:
  using Error::Error;
};

// Non-manifold or inconsistently oriented surface.
class TopologyError : public Error
{
public:
  using Error::Error;
};

// Malformed input file; carries the offending line (1-based, 0 if unknown).
class ParseError : public Error
{
public:
  ParseError(const std::string &msg, std::size_t line)
    : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

// Argument outside an operation's domain (e.g. point not on the support triangle).
class DomainError : public Error
{
public:
  using Error::Error;
};

// NaN/Inf produced by quadrature, or a factorisation that should not fail did.
class NumericalError : public Error
{
public:
  using Error::Error;
};

// The analytic reference failed its own consistency checks; error metrics are not trusted.
class OracleError : public Error
{
public:
  using Error::Error;
};

}  // namespace rwgcfie

#endif  // RWGCFIE_ERRORS_HPP
