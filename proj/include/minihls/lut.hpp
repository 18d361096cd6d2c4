#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minihls/ast.hpp"

namespace minihls {

/// A resolved lookup table. `contents.size() == 1 << address_width` and every
/// entry fits `data`.
struct LutSpec {
  enum class Source { Builtin, InitFile };

  std::string name;
  int address_width = 0;
  ScalarType data;
  Source source = Source::Builtin;
  std::string path;  // init file, when source == InitFile
  std::vector<int64_t> contents;
};

using LutTable = std::map<std::string, LutSpec>;

/// 10-bit address, signed 16-bit data: round(32767 * cos(2*pi*k/1024)).
LutSpec builtin_cos();

/// Parses init-file text: one decimal or 0x-hex value per line, line k is the
/// entry at address k, `#` starts a comment, blank lines are skipped.
std::vector<int64_t> parse_init_text(const std::string &text, int64_t entries, ScalarType data);

LutSpec load_init_file(const std::string &name, const std::string &path, int64_t entries, ScalarType data);

/// Resolves every table the kernel references: builtins by name, declared
/// tables through `bindings` (table name -> init file path).
LutTable resolve_luts(const KernelAst &ast, const std::map<std::string, std::string> &bindings);

/// Names of tables referenced by `lut("...")` in the kernel, sorted.
std::vector<std::string> referenced_luts(const KernelAst &ast);

}  // namespace minihls
