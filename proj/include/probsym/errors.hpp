#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace probsym {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed program text. Carries a 1-based source position and the set of
/// tokens that would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
             std::string found)
      : Error(format(line, column, expected, found)),
        line_(line),
        column_(column),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::vector<std::string>& expected, const std::string& found) {
    std::string msg = "line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": expected ";
    if (expected.size() > 1) msg += "one of ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += ", ";
      msg += expected[i];
    }
    msg += "; found " + found;
    return msg;
  }

  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// `x ~ d` with `d` not one of rnd, stdnorm, bern, norm.
class UnknownDistribution : public ParseError {
 public:
  UnknownDistribution(std::size_t line, std::size_t column, const std::string& name)
      : ParseError(line, column, "unknown distribution '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// An operator applied outside its domain (sqrt of a negative number).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exploration produced more paths than the configured cap.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// The big-step enumerator only handles loop-free programs.
class UnsupportedLoop : public Error {
 public:
  UnsupportedLoop() : Error("big-step enumeration does not support while loops") {}
};

/// Normalising by an evidence estimate of zero.
class ZeroEvidence : public Error {
 public:
  ZeroEvidence() : Error("evidence (mass of all accepted runs) is zero") {}
};

/// The discrete enumeration oracle only accepts Bernoulli-only programs.
class NotDiscrete : public Error {
 public:
  using Error::Error;
};

/// The configured SMT solver could not be started.
class SolverUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace probsym
