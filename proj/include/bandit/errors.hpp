#pragma once

#include <stdexcept>
#include <string>

namespace bandit {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a reward sample or density is too thin to work with (empty
/// sample, degenerate density, missing distribution). Policies catch this
/// and fall back to a default exploration rate.
struct InsufficientData : Error {
  using Error::Error;
};

}  // namespace bandit
