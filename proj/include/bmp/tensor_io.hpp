#pragma once

#include <iosfwd>
#include <string>

#include "bmp/tensor.hpp"

namespace bmp {

// Binary tensor container "TLT1": magic bytes 'T' 'L' 'T' '1', one unsigned
// 8-bit mode count, the extents as little-endian u32, then the payload as
// little-endian IEEE-754 doubles in the fixed layout. Masks use the same
// container with entries restricted to 0.0/1.0.
void write_tlt(std::ostream& out, const Tensor& x);
void write_tlt(const std::string& path, const Tensor& x);
Tensor read_tlt(std::istream& in);
Tensor read_tlt(const std::string& path);

void write_tlt(const std::string& path, const MaskTensor& mask);
MaskTensor read_mask_tlt(const std::string& path);

// CSV import for 2-mode tensors: one row per first-mode index.
Tensor read_matrix_csv(std::istream& in);
Tensor read_matrix_csv(const std::string& path);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace bmp
