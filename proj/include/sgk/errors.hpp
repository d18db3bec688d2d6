// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sgk {

/// Base class of every error thrown by the library. The message is prefixed
/// with the module name so callers can surface it unchanged.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error("[" + module + "] " + what),
        module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Factorization failed even after the largest diagonal shift.
class IllConditionedError : public Error {
 public:
  IllConditionedError(std::string module, const std::string& what,
                      double last_jitter)
      : Error(std::move(module), what), last_jitter_(last_jitter) {}

  double last_jitter() const noexcept { return last_jitter_; }

 private:
  double last_jitter_;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class StaleInterpolantError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgk
