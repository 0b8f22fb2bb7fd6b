#pragma once

#include <cstddef>
#include <vector>

namespace capsel {

using DenseVector = std::vector<double>;

/// Cosine similarity clamped to [-1, 1]. If either vector is all-zero the
/// result is 0 (a defined non-match, never an error).
/// Throws std::invalid_argument on length mismatch.
double cosine_similarity(const DenseVector& a, const DenseVector& b);

/// L2 norm of a - b. Throws std::invalid_argument on length mismatch.
double euclidean_distance(const DenseVector& a, const DenseVector& b);

double l2_norm(const DenseVector& v);

bool is_zero_vector(const DenseVector& v);

void add_in_place(DenseVector& acc, const DenseVector& v);

void scale_in_place(DenseVector& v, double factor);

}  // namespace capsel
