#include "capsel/dense_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capsel {

namespace {

void require_same_length(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("vector length mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double cosine_similarity(const DenseVector& a, const DenseVector& b) {
  require_same_length(a, b);
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    return 0.0;
  }
  const double value = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return std::clamp(value, -1.0, 1.0);
}

double euclidean_distance(const DenseVector& a, const DenseVector& b) {
  require_same_length(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double l2_norm(const DenseVector& v) {
  double sum = 0.0;
  for (const double x : v) {
    sum += x * x;
  }
  return std::sqrt(sum);
}

bool is_zero_vector(const DenseVector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void add_in_place(DenseVector& acc, const DenseVector& v) {
  require_same_length(acc, v);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] += v[i];
  }
}

void scale_in_place(DenseVector& v, double factor) {
  for (double& x : v) {
    x *= factor;
  }
}

}  // namespace capsel
