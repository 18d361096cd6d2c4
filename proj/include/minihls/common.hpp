#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace minihls {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

/// Integer type of a kernel-level value. Widths are 1..32 at the kernel
/// boundary; internal data-path signals may grow to 64 bits.
struct ScalarType {
  bool is_signed = true;
  int width = 32;

  friend bool operator==(const ScalarType &, const ScalarType &) = default;

  std::string to_string() const;
};

/// Every failure raised by a pass carries a kind tag so the driver can map
/// it onto a diagnostic and an exit code.
enum class ErrorKind {
  Syntax,
  UnsupportedConstruct,
  Restriction,
  Overflow,
  NotConstantBounds,
  NonUniformPattern,
  Lowering,
  UnstructuredControlFlow,
  WidthOverflow,
  FeedbackTooDeep,
  InitFile,
  Config,
  Link,
  Emit,
  VectorShape,
  Timeout,
  XValue,
  Oracle,
  Internal,
};

const char *error_kind_name(ErrorKind kind);

struct Finding {
  SourceLoc loc;
  std::string message;
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message, SourceLoc loc = {})
      : std::runtime_error(message), kind_(kind), loc_(loc), findings_{{loc, message}} {}
  Error(ErrorKind kind, std::vector<Finding> findings);

  ErrorKind kind() const { return kind_; }
  SourceLoc loc() const { return loc_; }
  /// One entry per violation; a single-finding error has exactly one.
  const std::vector<Finding> &findings() const { return findings_; }

private:
  ErrorKind kind_;
  SourceLoc loc_;
  std::vector<Finding> findings_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string &message, SourceLoc loc = {});

// Two's-complement helpers on values carried in int64_t.

/// Wraps `v` into the value range of a `width`-bit integer of the given
/// signedness.
int64_t wrap_to(int64_t v, int width, bool is_signed);
inline int64_t wrap_to(int64_t v, ScalarType t) { return wrap_to(v, t.width, t.is_signed); }

bool fits(int64_t v, int width, bool is_signed);

/// Smallest width that represents `v`: unsigned for v >= 0, signed otherwise.
int bits_for_constant(int64_t v);

int64_t min_value(int width, bool is_signed);
int64_t max_value(int width, bool is_signed);

/// ceil(log2(n)) with a minimum of 1.
int clog2(uint64_t n);

inline uint64_t low_mask(int width) {
  return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

}  // namespace minihls
