#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridfdi {

/// One structured problem found while reading or validating an input file.
struct Diagnostic {
  int line = 0;    // 1-based; 0 when the problem is not tied to a line
  int column = 0;  // 1-based; 0 when unknown
  std::string message;

  std::string render() const;
};

/// Input could not be turned into a valid model. Carries every diagnostic
/// found, not just the first one.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

/// Numerical routine failed (divergence, singular system, ...).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Measurement set cannot determine the state (rank-deficient gain matrix).
class ObservabilityError : public std::runtime_error {
public:
  ObservabilityError(const std::string& message, int null_space_size)
      : std::runtime_error(message), null_space_size_(null_space_size) {}
  int null_space_size() const { return null_space_size_; }

private:
  int null_space_size_ = 0;
};

/// Attack design has a constraint/unknown count mismatch. Carries the counts
/// and, when available, suggested fixed-variable sets that square the system.
class DofError : public std::runtime_error {
public:
  DofError(const std::string& message, int constraints, int free_unknowns,
           std::vector<std::string> suggested_fixed)
      : std::runtime_error(message),
        constraints_(constraints),
        free_unknowns_(free_unknowns),
        suggested_fixed_(std::move(suggested_fixed)) {}
  int constraints() const { return constraints_; }
  int free_unknowns() const { return free_unknowns_; }
  const std::vector<std::string>& suggested_fixed() const { return suggested_fixed_; }

private:
  int constraints_ = 0;
  int free_unknowns_ = 0;
  std::vector<std::string> suggested_fixed_;
};

}  // namespace gridfdi
