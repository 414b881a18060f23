#pragma once

#include "caldera/types.hpp"

namespace caldera {

struct Svd {
  Matrix U;  // left singular vectors, as columns
  Vector s;  // descending
  Matrix V;  // right singular vectors, as columns
};

// Each singular pair's sign is fixed so the largest-magnitude entry of the
// left vector is positive (right vector flipped with it). With `full` the
// orthonormal completions of U and V are returned as well.
Svd svd(const Matrix& A, bool full = false);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns
};

SymmetricEigen symmetric_eigen(const Matrix& S);

// Count of singular values above rel_cutoff * s(0).
Index numerical_rank(const Vector& s, double rel_cutoff = 1e-12);

Matrix pseudo_inverse(const Matrix& A, double rel_cutoff = 1e-12);

// m * trace(E H E^T), i.e. ||E X^T||_F^2 when H = X^T X / m.
double proxy_error(const Matrix& E, const Matrix& H, double m);

double relative_asymmetry(const Matrix& S);

}  // namespace caldera
