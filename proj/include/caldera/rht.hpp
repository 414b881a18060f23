#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caldera/types.hpp"

namespace caldera {

struct RhtContext {
  std::uint64_t seed = 0;
  std::vector<double> left_signs;   // length padded_rows
  std::vector<double> right_signs;  // length padded_cols
  Index rows = 0, cols = 0;
  Index padded_rows = 0, padded_cols = 0;
};

Index next_power_of_two(Index n);

RhtContext make_rht(std::uint64_t seed, Index rows, Index cols);

// Unnormalized in-place Walsh-Hadamard transform; length must be a power of two.
void fwht(std::span<double> v);

// H_L^T W H_R on the zero-padded W, with H = Hadamard diag(signs) / sqrt(n).
Matrix rht_forward(const Matrix& W, const RhtContext& ctx);
// H_R^T H H_R; the padding block of H is set to padding_diagonal * I.
Matrix rht_forward_hessian(const Matrix& H, const RhtContext& ctx, double padding_diagonal = 0.0);
// H_L Wt H_R^T cropped to the original shape.
Matrix rht_inverse(const Matrix& Wt, const RhtContext& ctx);

}  // namespace caldera
