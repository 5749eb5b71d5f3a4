#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sgl {

struct SourceLoc {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;  // stable identifier, e.g. E_READ_EFFECT
  std::string message;
  SourceLoc loc;
};

std::string format_diagnostic(const Diagnostic& d, const std::string& file = {});
bool has_errors(const std::vector<Diagnostic>& diags);

/// Thrown when a pass cannot continue; carries everything collected so far.
class CompileError : public std::runtime_error {
 public:
  explicit CompileError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// Engine-level invariant violation (partition overlap, plan/schema mismatch).
class EngineError : public std::runtime_error {
 public:
  EngineError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace sgl
