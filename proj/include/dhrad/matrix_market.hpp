#pragma once

#include <string>

#include "dhrad/types.hpp"

namespace dhrad
{

/// Reads a Matrix Market file. Array format gives a dense operator, coordinate format a
/// sparse one; symmetric, skew-symmetric and hermitian storage is expanded.
Operator read_matrix_market(const std::string &path);

/// Writes general storage with 17 significant digits; real field when all imaginary parts are 0.
void write_matrix_market(const std::string &path, const Mat &A);
void write_matrix_market(const std::string &path, const SpMat &A);
void write_matrix_market(const std::string &path, const Operator &A);

}  // namespace dhrad
