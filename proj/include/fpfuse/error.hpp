#pragma once

#include <stdexcept>
#include <string>

namespace fpfuse {

enum class ErrorKind {
  Io,
  Parse,
  Schema,
  Dimension,
  Precondition,
  Conflict,
  Version,
  Numeric,
};

const char* to_string(ErrorKind kind) noexcept;

// All library failures are reported through this exception. The C API maps
// `kind` onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Error raised by a pipeline stage; carries the stage name ("ingest",
// "split", "normalize", ...) so callers can report where a run failed.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& what)
      : Error(kind, stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace fpfuse
