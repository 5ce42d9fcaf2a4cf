#pragma once

#include <stdexcept>
#include <string>

namespace lrsdl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad header, unparsable number).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input carrying unusable values (NaN/Inf, bad labels).
class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. an empty class).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate or failed factorization inside a solver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {
void throw_dimension(const std::string& what, long expected_rows, long expected_cols,
                     long rows, long cols);
}  // namespace detail

}  // namespace lrsdl

namespace lrsdl {

/// Non-fatal diagnostics go to std::clog unless silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace lrsdl
