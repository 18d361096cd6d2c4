#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "minihls/ast.hpp"

namespace minihls {

/// Parses the restricted C dialect. Recognises `#define NAME <int expr>` and
/// ignores `#include`; any other directive is rejected.
KernelAst parse(std::string_view source);

/// Classifies kernel parameters (pointer -> scalar output, array -> input or
/// output by use) and collects every violation of the input restrictions into
/// a single RestrictionError.
KernelAst check_restrictions(KernelAst ast);

/// Inlines helper calls into the kernel and drops the helpers. `lut(...)` and
/// the feedback intrinsics survive.
KernelAst inline_calls(KernelAst ast);

/// A function on a call-graph cycle and the call site that closes it.
std::optional<std::pair<std::string, SourceLoc>> find_recursion(const KernelAst &ast);

/// Σ coeffs[idx]·idx + constant.
struct Affine {
  std::map<std::string, int64_t> coeffs;
  int64_t constant = 0;

  bool is_constant() const { return coeffs.empty(); }
  int64_t coeff(const std::string &idx) const {
    auto it = coeffs.find(idx);
    return it == coeffs.end() ? 0 : it->second;
  }
  int64_t evaluate(const std::map<std::string, int64_t> &values) const;
  bool operator==(const Affine &) const = default;
};

/// Extracts the affine form of `e` over `indices`, or nullopt when `e` is not
/// affine in them with integer constant coefficients.
std::optional<Affine> to_affine(const Expr &e, const std::set<std::string> &indices);

/// Evaluates an expression with only literal leaves (exact integer
/// arithmetic); nullopt if a leaf is not a literal.
std::optional<int64_t> eval_constant(const Expr &e);

}  // namespace minihls
