#pragma once

#include <stdexcept>
#include <string>

namespace ccp {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& w) : Error("ShapeMismatch: " + w) {}
};

struct EmptySubset : Error {
  explicit EmptySubset(const std::string& w) : Error("EmptySubset: " + w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error("ParseError: " + w) {}
};

struct RaggedSeries : Error {
  explicit RaggedSeries(const std::string& w) : Error("RaggedSeries: " + w) {}
};

struct NonFinite : Error {
  explicit NonFinite(const std::string& w) : Error("NonFinite: " + w) {}
};

struct InvalidParam : Error {
  explicit InvalidParam(const std::string& w) : Error("InvalidParam: " + w) {}
};

struct InvalidLevel : Error {
  explicit InvalidLevel(const std::string& w) : Error("InvalidLevel: " + w) {}
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& w) : Error("InvalidInput: " + w) {}
};

struct SingularSystem : Error {
  explicit SingularSystem(const std::string& w) : Error("SingularSystem: " + w) {}
};

struct InsufficientCalibration : Error {
  explicit InsufficientCalibration(const std::string& w)
      : Error("InsufficientCalibration: " + w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("IoError: " + w) {}
};

}  // namespace ccp
