#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace hcstretch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition (dimension mismatch, wrong
// density, n not a power of three, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An enumeration or solver cap would be exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A structural property that must hold did not. Carries the kind of
// violation and, when there is one, the offending point.
class VerificationError : public Error {
 public:
  VerificationError(std::string kind, std::string message,
                    std::optional<std::uint64_t> witness = std::nullopt)
      : Error(kind + ": " + message), kind_(std::move(kind)), witness_(witness) {}

  const std::string& kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> witness() const noexcept { return witness_; }

 private:
  std::string kind_;
  std::optional<std::uint64_t> witness_;
};

}  // namespace hcstretch
