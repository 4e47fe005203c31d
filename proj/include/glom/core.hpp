#pragma once

#include <stdexcept>
#include <string>

namespace glom {

// Base of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates an operation's preconditions.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Input data (files, manifests, annotations, artifacts) is unusable.
class DataError : public Error {
public:
  using Error::Error;
};

// Training could not complete (empty dataset, NaN loss, ...).
class TrainingError : public Error {
public:
  using Error::Error;
};

// No tissue pixels above the OD threshold.
class NoTissueError : public DataError {
public:
  NoTissueError() : DataError("no tissue found") {}
};

enum class ArtifactFault { corrupt, version_mismatch, kind_mismatch };

class ArtifactError : public DataError {
public:
  ArtifactError(ArtifactFault fault, const std::string& msg)
      : DataError(msg), fault(fault) {}
  ArtifactFault fault;
};

}  // namespace glom
