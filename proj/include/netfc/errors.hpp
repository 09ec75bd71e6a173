#pragma once

#include <stdexcept>

namespace netfc {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// float16 NaN/infinity operands are rejected at parse, not propagated
struct exceptional_operand : error {
    using error::error;
};

struct format_mismatch : error {
    using error::error;
};

// lookup of a key with no stored row (pruned table or ternary miss)
struct missing_entry : error {
    using error::error;
};

}  // namespace netfc
