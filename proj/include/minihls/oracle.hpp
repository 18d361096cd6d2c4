#pragma once

#include "minihls/ast.hpp"
#include "minihls/io.hpp"
#include "minihls/lut.hpp"

namespace minihls {

/// Golden sequential semantics of the kernel dialect.
///
/// Expressions evaluate exactly over the integers; a value wraps (two's
/// complement) only when it is stored into a typed variable, array element or
/// output pointer. `x / 2^k` is an arithmetic shift and `x % 2^k` the matching
/// floor remainder. `lut(t, i)` reads entry `i mod size(t)`.
/// `ROCCC_store2next(v, e)` takes effect at the end of the current iteration
/// of the outermost loop; `ROCCC_load_prev(v)` reads the committed value.
///
/// Returns the output arrays and output scalars. Throws OracleError on an
/// out-of-bounds subscript and VectorShapeError when `inputs` does not match
/// the kernel's inputs.
KernelIO interpret_oracle(const KernelAst &ast, const KernelIO &inputs, const LutTable &luts = {});

/// Checks that `inputs` provides every input array (with the declared size and
/// element range) and every scalar input.
void validate_inputs(const KernelAst &ast, const KernelIO &inputs);

}  // namespace minihls
