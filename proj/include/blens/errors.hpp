/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every blens module.
 *
 * All failures surface as subclasses of blens::Error so callers can catch
 * one base type at the CLI boundary and still branch on the specific
 * condition in library code.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace blens {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Case file could not be parsed or violates basic schema rules.
class MalformedCase : public Error {
 public:
  using Error::Error;
};

/// Parsed case is electrically unusable (islands, missing slack, ...).
class InvalidTopology : public Error {
 public:
  using Error::Error;
};

/// Scenario stress factors must be strictly increasing.
class UnsortedFactors : public Error {
 public:
  using Error::Error;
};

/// Admittance assembly hit a degenerate element (zero impedance branch).
class SingularAssembly : public Error {
 public:
  using Error::Error;
};

/// Jacobian requested at a state with a near-zero voltage magnitude.
class VoltageCollapsePoint : public Error {
 public:
  using Error::Error;
};

/// Linear step system stayed unfactorizable even at maximum damping.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Solve (or homotopy chain) exhausted its options without converging.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Coefficient update was asked to rank an all-zero compensation vector.
class AllZeroSlack : public Error {
 public:
  using Error::Error;
};

/// Exhaustive search exceeded its cardinality budget without a witness.
class CardinalityExceeded : public Error {
 public:
  using Error::Error;
};

/// Report document does not carry the schema this build understands.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Report document lacks the sweep mode a consumer asked for.
class MissingMode : public Error {
 public:
  using Error::Error;
};

}  // namespace blens
