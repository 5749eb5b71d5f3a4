#include "sgl/diagnostics.hpp"

namespace sgl {

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  std::string out = file.empty() ? std::string() : file + ":";
  out += std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": ";
  out += d.severity == Severity::Error ? "error " : "warning ";
  out += d.code + ": " + d.message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

namespace {
std::string summarize(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return "compilation failed";
  return format_diagnostic(diags.front()) + (diags.size() > 1 ? " (+" + std::to_string(diags.size() - 1) + " more)" : "");
}
}  // namespace

CompileError::CompileError(std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), diags_(std::move(diags)) {}

}  // namespace sgl
