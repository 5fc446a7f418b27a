#pragma once

#include <stdexcept>
#include <string>

namespace poses {

// Innovation covariance S is numerically singular; the filter update and the
// gating distance are undefined, so the offending call refuses to proceed.
struct SingularInnovation : std::runtime_error {
  explicit SingularInnovation(const std::string& what) : std::runtime_error(what) {}
};

// A scenario/model configuration violates its documented invariants.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unfolding would exceed the configured path budget.
struct ExplosionError : std::runtime_error {
  explicit ExplosionError(const std::string& what) : std::runtime_error(what) {}
};

// A solve was attempted on a path set that does not contain the zero-payoff
// (unattacked) path; every optimum below is relative to that baseline.
struct MissingOriginal : std::runtime_error {
  explicit MissingOriginal(const std::string& what) : std::runtime_error(what) {}
};

// Command line could not be parsed into a valid run description.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A file could not be read, written, or understood.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poses
