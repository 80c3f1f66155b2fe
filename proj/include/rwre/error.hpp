#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

// Base of every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidLaw : public Error {
 public:
  using Error::Error;
};

// Transience criterion too close to its threshold to decide numerically.
class BorderlineCriterion : public Error {
 public:
  using Error::Error;
};

class NotTransient : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NotAncestor : public Error {
 public:
  using Error::Error;
};

class InsufficientRegenerations : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : Error(format(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& field, std::size_t line,
                            const std::string& what) {
    std::string out = "config error";
    if (line != 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " (" + field + ")";
    return out + ": " + what;
  }

  std::string field_;
  std::size_t line_;
};

}  // namespace rwre
