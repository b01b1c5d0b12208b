#pragma once

#include <stdexcept>

namespace bct {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Margin validation.
class TotalMismatch : public Error { public: using Error::Error; };
class EntryTooLarge : public Error { public: using Error::Error; };
class EmptyMargins : public Error { public: using Error::Error; };
class InfeasibleFamily : public Error { public: using Error::Error; };

// Sampling and counting.
class InfeasibleInstance : public Error { public: using Error::Error; };
class TooLarge : public Error { public: using Error::Error; };
class ZeroCount : public Error { public: using Error::Error; };

// Estimator.
class ParamMismatch : public Error { public: using Error::Error; };
class WindowInvalid : public Error { public: using Error::Error; };

// Analytic formulas (argument outside the stated domain).
class OutOfRange : public Error { public: using Error::Error; };

// CLI / run configuration.
class ConfigError : public Error { public: using Error::Error; };

}  // namespace bct
