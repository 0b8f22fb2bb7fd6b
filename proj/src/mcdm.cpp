#include "capsel/mcdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace capsel {

namespace {

void validate_matrix(const DecisionMatrix& matrix) {
  if (matrix.rows == 0 || matrix.cols == 0) {
    throw std::invalid_argument("decision matrix must be at least 1x1");
  }
  if (matrix.values.size() != matrix.rows * matrix.cols) {
    throw std::invalid_argument("decision matrix storage size mismatch");
  }
  for (const double x : matrix.values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("decision matrix contains a non-finite value");
    }
  }
}

}  // namespace

DecisionMatrix shift_nonnegative(const DecisionMatrix& matrix,
                                 std::vector<double>* applied_shifts) {
  validate_matrix(matrix);
  DecisionMatrix shifted = matrix;
  if (applied_shifts != nullptr) {
    applied_shifts->assign(matrix.cols, 0.0);
  }
  for (std::size_t j = 0; j < matrix.cols; ++j) {
    double min_value = matrix.at(0, j);
    for (std::size_t i = 1; i < matrix.rows; ++i) {
      min_value = std::min(min_value, matrix.at(i, j));
    }
    if (min_value < 0.0) {
      const double shift = -min_value;
      for (std::size_t i = 0; i < matrix.rows; ++i) {
        shifted.at(i, j) += shift;
      }
      if (applied_shifts != nullptr) {
        (*applied_shifts)[j] = shift;
      }
    }
  }
  return shifted;
}

WeightVector entropy_weights(const DecisionMatrix& matrix) {
  validate_matrix(matrix);
  const std::size_t m = matrix.rows;
  const std::size_t n = matrix.cols;
  if (m < 2) {
    throw std::invalid_argument("entropy_weights: need at least 2 alternatives");
  }
  for (const double x : matrix.values) {
    if (x < 0.0) {
      throw std::invalid_argument("entropy_weights: matrix must be non-negative");
    }
  }

  std::vector<double> diversification(n, 0.0);
  const double log_m = std::log(static_cast<double>(m));
  for (std::size_t j = 0; j < n; ++j) {
    double column_sum = 0.0;
    double column_min = matrix.at(0, j);
    double column_max = matrix.at(0, j);
    for (std::size_t i = 0; i < m; ++i) {
      column_sum += matrix.at(i, j);
      column_min = std::min(column_min, matrix.at(i, j));
      column_max = std::max(column_max, matrix.at(i, j));
    }
    if (column_min == column_max || column_sum == 0.0) {
      // Identical entries (including all-zero, read as uniform): maximum
      // entropy, exactly zero diversification.
      diversification[j] = 0.0;
      continue;
    }
    double entropy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double p = matrix.at(i, j) / column_sum;
      if (p > 0.0) {
        entropy -= p * std::log(p);  // 0*ln(0) := 0
      }
    }
    entropy /= log_m;
    diversification[j] = std::max(0.0, 1.0 - entropy);
  }

  const double total = std::accumulate(diversification.begin(), diversification.end(), 0.0);
  WeightVector result;
  if (total == 0.0) {
    result.weights.assign(n, 1.0 / static_cast<double>(n));
    result.degenerate_uniform = true;
    return result;
  }
  result.weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    result.weights[j] = diversification[j] / total;
  }
  return result;
}

TopsisResult topsis_rank(const DecisionMatrix& matrix, const WeightVector& weights) {
  validate_matrix(matrix);
  const std::size_t m = matrix.rows;
  const std::size_t n = matrix.cols;
  if (weights.weights.size() != n) {
    throw std::invalid_argument("topsis_rank: weight count does not match criteria count");
  }
  if (matrix.kinds.size() != n) {
    throw std::invalid_argument("topsis_rank: criterion kinds missing");
  }

  // Root-square column normalization; an all-zero column stays zero.
  std::vector<double> weighted(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double sum_squares = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum_squares += matrix.at(i, j) * matrix.at(i, j);
    }
    const double denom = std::sqrt(sum_squares);
    for (std::size_t i = 0; i < m; ++i) {
      const double normalized = denom == 0.0 ? 0.0 : matrix.at(i, j) / denom;
      weighted[i * n + j] = weights.weights[j] * normalized;
    }
  }

  TopsisResult result;
  result.ideal.resize(n);
  result.anti_ideal.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double max_value = weighted[j];
    double min_value = weighted[j];
    for (std::size_t i = 1; i < m; ++i) {
      max_value = std::max(max_value, weighted[i * n + j]);
      min_value = std::min(min_value, weighted[i * n + j]);
    }
    if (matrix.kinds[j] == CriterionKind::kBenefit) {
      result.ideal[j] = max_value;
      result.anti_ideal[j] = min_value;
    } else {
      result.ideal[j] = min_value;
      result.anti_ideal[j] = max_value;
    }
  }

  result.closeness.resize(m);
  result.separation_plus.resize(m);
  result.separation_minus.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double d_plus = 0.0;
    double d_minus = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = weighted[i * n + j];
      d_plus += (v - result.ideal[j]) * (v - result.ideal[j]);
      d_minus += (v - result.anti_ideal[j]) * (v - result.anti_ideal[j]);
    }
    d_plus = std::sqrt(d_plus);
    d_minus = std::sqrt(d_minus);
    result.separation_plus[i] = d_plus;
    result.separation_minus[i] = d_minus;
    // Identical to both ideals (all rows equal): defined as closeness 1.
    if (d_plus + d_minus == 0.0) {
      result.closeness[i] = 1.0;
      ++result.degenerate_rows;
    } else {
      result.closeness[i] = d_minus / (d_plus + d_minus);
    }
  }

  result.ranking.resize(m);
  std::iota(result.ranking.begin(), result.ranking.end(), std::size_t{0});
  std::sort(result.ranking.begin(), result.ranking.end(),
            [&result](std::size_t a, std::size_t b) {
              if (result.closeness[a] != result.closeness[b]) {
                return result.closeness[a] > result.closeness[b];
              }
              return a < b;
            });
  return result;
}

SelectionOutcome select_best(const TopsisResult& result, const CandidateSet& candidates) {
  if (result.closeness.size() != candidates.entries.size() || candidates.entries.empty()) {
    throw std::invalid_argument("select_best: result rows do not align with candidates");
  }
  const double best_closeness = result.closeness[result.ranking.front()];

  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < result.closeness.size(); ++i) {
    if (result.closeness[i] == best_closeness) {
      tied.push_back(i);
    }
  }

  SelectionOutcome outcome;
  if (tied.size() == 1) {
    outcome.index = tied.front();
    return outcome;
  }

  outcome.tie_break_used = true;
  outcome.index = *std::min_element(
      tied.begin(), tied.end(), [&candidates](std::size_t a, std::size_t b) {
        const Candidate& ca = candidates.entries[a];
        const Candidate& cb = candidates.entries[b];
        if (ca.source_visual_similarity != cb.source_visual_similarity) {
          return ca.source_visual_similarity > cb.source_visual_similarity;
        }
        if (ca.cosine_to_reference != cb.cosine_to_reference) {
          return ca.cosine_to_reference > cb.cosine_to_reference;
        }
        return ca.caption < cb.caption;
      });
  outcome.tie_break_note =
      "closeness tie across " + std::to_string(tied.size()) +
      " candidates resolved by (visual similarity, cosine to reference, caption text)";
  return outcome;
}

}  // namespace capsel
