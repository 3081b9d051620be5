#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace prefbasis {

// Root of every error raised deliberately by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input data violates a documented contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Run configuration is unusable; aborts the whole run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Model output could not be parsed. The raw text is kept for auditing.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw_text)
      : Error(what), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

// Transport, auth or upstream failure reported by a provider.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}

  // HTTP status when one was received, 0 otherwise.
  int status() const { return status_; }

 private:
  int status_;
};

// An MMC candidate has an empty sampling pool at `tier`.
class TaskUnbuildable : public Error {
 public:
  TaskUnbuildable(const std::string& what, int tier) : Error(what), tier_(tier) {}

  int tier() const { return tier_; }

 private:
  int tier_;
};

// Unknown session token.
class AuthorizationError : public Error {
 public:
  using Error::Error;
};

// Request is well formed but out of protocol order.
class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace prefbasis
