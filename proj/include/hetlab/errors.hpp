#pragma once

#include <stdexcept>
#include <string>

namespace hetlab {

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Transit precondition failed: the level curve lies on the wrong side of the
// cylinder for the requested involution case, so the orbit leaves V_c without
// hitting the exit disk.
struct WrongSideOfCylinder : DomainError {
  explicit WrongSideOfCylinder(const std::string& what) : DomainError(what) {}
};

// Point sits on the separatrix trace (eta = 0); the transit map is undefined.
struct EtaZero : DomainError {
  explicit EtaZero(const std::string& what) : DomainError(what) {}
};

struct NoRoot : std::runtime_error {
  explicit NoRoot(const std::string& what) : std::runtime_error(what) {}
};

struct KBelowThreshold : DomainError {
  explicit KBelowThreshold(const std::string& what) : DomainError(what) {}
};

struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

struct CaseMismatch : std::runtime_error {
  explicit CaseMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NoSignChange : std::runtime_error {
  explicit NoSignChange(const std::string& what) : std::runtime_error(what) {}
};

struct GenericityFailure : std::runtime_error {
  explicit GenericityFailure(const std::string& what)
      : std::runtime_error(what) {}
};

struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hetlab
