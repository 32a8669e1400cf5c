#pragma once

#include <stdexcept>
#include <string>

namespace erag {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (empty id, empty text, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// The pre-retrieval LLM produced nothing usable, even after a retry.
class PreRetrievalError : public Error {
 public:
  using Error::Error;
};

/// A backend failure that may succeed on retry (timeouts, 5xx, 429).
class TransientError : public Error {
 public:
  using Error::Error;
};

/// Non-recoverable backend failure, or a transient one after all retries.
class GatewayError : public Error {
 public:
  using Error::Error;
};

/// The request exceeded the model's input budget.
class TokenLimitError : public Error {
 public:
  using Error::Error;
};

/// The scripted backend had no rule left for the request.
class ScriptExhaustedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace erag
