#pragma once

#include <stdexcept>
#include <string>

namespace lxs {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// used in the CLI's structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define LXS_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  }

LXS_DEFINE_ERROR(DomainError, "domain");
LXS_DEFINE_ERROR(IndexError, "basis_index");
LXS_DEFINE_ERROR(DegenerateAlphaError, "degenerate_alpha");
LXS_DEFINE_ERROR(ConstraintError, "constraint_violation");
LXS_DEFINE_ERROR(LabelError, "label");
LXS_DEFINE_ERROR(MatrixError, "matrix");
LXS_DEFINE_ERROR(ParseError, "parse");
LXS_DEFINE_ERROR(InsufficientDataError, "insufficient_data");
LXS_DEFINE_ERROR(SpecError, "spec");
LXS_DEFINE_ERROR(LookupError, "lookup");
LXS_DEFINE_ERROR(IndeterminateError, "indeterminate");
LXS_DEFINE_ERROR(ConfigError, "config");

#undef LXS_DEFINE_ERROR

}  // namespace lxs
