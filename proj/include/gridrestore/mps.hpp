#pragma once

#include <string>

#include "gridrestore/lp.hpp"
#include "gridrestore/milp.hpp"

namespace gridrestore {

// Fixed-format MPS export.
//
// Fixed format limits names to 8 characters, so rows are written as
// R0000001.. and columns as C0000001.. in model order (see mps_column_name).
// Maximization problems are written with negated objective coefficients,
// since fixed MPS has no portable sense marker; a comment line records it.
// Binary columns are wrapped in MARKER INTORG/INTEND blocks with explicit
// [0,1] bounds. Output is a pure function of the program.
std::string write_mps(const LinearProgram& lp);
std::string write_mps(const MixedIntegerProgram& mip);

std::string mps_column_name(std::size_t index);
std::string mps_row_name(std::size_t index);

}  // namespace gridrestore
