// Exception hierarchy. Every throwing operation tags its message with
// "module.op:" so failures are attributable without a debugger, and the
// two bases map onto distinct process exit codes in the CLI.
#pragma once

#include <stdexcept>
#include <string>

namespace spikeloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected inputs: parameters, expressions, configs, domain faults.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An iteration ran out of budget or lost the solution.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// --- validation family ---
struct BadDimension : ValidationError { using ValidationError::ValidationError; };
struct ExponentTooSmall : ValidationError { using ValidationError::ValidationError; };
struct SupercriticalPair : ValidationError { using ValidationError::ValidationError; };
struct NonpositivePotential : ValidationError { using ValidationError::ValidationError; };
struct ExprSyntaxError : ValidationError { using ValidationError::ValidationError; };
struct UnknownIdentifier : ValidationError { using ValidationError::ValidationError; };
struct EvalDomainError : ValidationError { using ValidationError::ValidationError; };
struct GridTooCoarse : ValidationError { using ValidationError::ValidationError; };
struct WindowTooCoarse : ValidationError { using ValidationError::ValidationError; };
struct WindowTooNoisy : ValidationError { using ValidationError::ValidationError; };
struct NotInHPlus : ValidationError { using ValidationError::ValidationError; };
struct EnergyMismatch : ValidationError { using ValidationError::ValidationError; };
struct ConfigError : ValidationError { using ValidationError::ValidationError; };
struct IoError : ValidationError { using ValidationError::ValidationError; };

// --- divergence family ---
struct NewtonDiverged : DivergenceError { using DivergenceError::DivergenceError; };
struct ContinuationStuck : DivergenceError { using DivergenceError::DivergenceError; };
struct PositivityLost : DivergenceError { using DivergenceError::DivergenceError; };
struct SpikeLost : DivergenceError { using DivergenceError::DivergenceError; };

}  // namespace spikeloc
