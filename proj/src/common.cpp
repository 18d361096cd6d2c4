#include "minihls/common.hpp"

namespace minihls {

std::string ScalarType::to_string() const {
  return (is_signed ? "int" : "uint") + std::to_string(width) + "_t";
}

const char *error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorKind::Restriction: return "RestrictionError";
    case ErrorKind::Overflow: return "OverflowError";
    case ErrorKind::NotConstantBounds: return "NotConstantBounds";
    case ErrorKind::NonUniformPattern: return "NonUniformPattern";
    case ErrorKind::Lowering: return "LoweringError";
    case ErrorKind::UnstructuredControlFlow: return "UnstructuredControlFlow";
    case ErrorKind::WidthOverflow: return "WidthOverflow";
    case ErrorKind::FeedbackTooDeep: return "FeedbackTooDeep";
    case ErrorKind::InitFile: return "InitFileError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Link: return "LinkError";
    case ErrorKind::Emit: return "EmitError";
    case ErrorKind::VectorShape: return "VectorShapeError";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::XValue: return "XValue";
    case ErrorKind::Oracle: return "OracleError";
    case ErrorKind::Internal: return "InternalError";
  }
  return "Error";
}

namespace {
std::string join_findings(const std::vector<Finding> &findings) {
  std::string out;
  for (const Finding &f : findings) {
    if (!out.empty()) out += "; ";
    out += f.message;
  }
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::vector<Finding> findings)
    : std::runtime_error(join_findings(findings)),
      kind_(kind),
      loc_(findings.empty() ? SourceLoc{} : findings.front().loc),
      findings_(std::move(findings)) {}

void fail(ErrorKind kind, const std::string &message, SourceLoc loc) {
  throw Error(kind, message, loc);
}

int64_t wrap_to(int64_t v, int width, bool is_signed) {
  if (width >= 64) return v;
  uint64_t bits = static_cast<uint64_t>(v) & low_mask(width);
  if (is_signed && width > 0 && (bits >> (width - 1)) & 1) bits |= ~low_mask(width);
  return static_cast<int64_t>(bits);
}

int64_t min_value(int width, bool is_signed) {
  if (!is_signed) return 0;
  if (width >= 64) return INT64_MIN;
  return -(int64_t{1} << (width - 1));
}

int64_t max_value(int width, bool is_signed) {
  if (width >= 64) return is_signed ? INT64_MAX : INT64_MAX;  // unsigned 64 clamps
  if (is_signed) return (int64_t{1} << (width - 1)) - 1;
  return static_cast<int64_t>(low_mask(width));
}

bool fits(int64_t v, int width, bool is_signed) {
  return v >= min_value(width, is_signed) && v <= max_value(width, is_signed);
}

int bits_for_constant(int64_t v) {
  if (v >= 0) {
    int w = 1;
    while (w < 63 && (v >> w) != 0) ++w;
    return w;
  }
  int w = 1;
  while (w < 64 && v < min_value(w, true)) ++w;
  return w;
}

int clog2(uint64_t n) {
  int w = 1;
  while (w < 64 && (uint64_t{1} << w) < n) ++w;
  return w;
}

}  // namespace minihls
