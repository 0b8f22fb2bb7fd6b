#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "capsel/candidate_selection.hpp"

namespace capsel {

enum class CriterionKind { kBenefit, kCost };

/// m alternatives x n criteria, row-major.
struct DecisionMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<CriterionKind> kinds;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct WeightVector {
  std::vector<double> weights;  // each >= 0, sums to 1
  bool degenerate_uniform = false;  // every column uniform, fell back to 1/n
};

struct TopsisResult {
  std::vector<double> closeness;          // in [0, 1]
  std::vector<std::size_t> ranking;       // row indices, closeness descending
  std::vector<double> ideal;              // A+ per column
  std::vector<double> anti_ideal;         // A- per column
  std::vector<double> separation_plus;    // d+ per row
  std::vector<double> separation_minus;   // d- per row
  std::size_t degenerate_rows = 0;        // rows with both separations zero
};

/// Per column: when the minimum is negative, add its magnitude to every
/// entry. Entropy normalization and the TOPSIS root-square normalization both
/// need non-negative inputs, and the shift preserves within-column order.
/// applied_shifts (when given) receives the per-column shift amounts.
DecisionMatrix shift_nonnegative(const DecisionMatrix& matrix,
                                 std::vector<double>* applied_shifts = nullptr);

/// Shannon-entropy criterion weights over a non-negative matrix. A column
/// with all-zero sum is treated as uniform (diversification 0); when every
/// column is uniform the weights fall back to 1/n. Throws for m < 2.
WeightVector entropy_weights(const DecisionMatrix& matrix);

/// Full TOPSIS pass over a non-negative matrix: root-square column
/// normalization, weighting, ideal/anti-ideal per criterion kind, Euclidean
/// separations and relative closeness. A row whose separations both vanish
/// gets closeness 1. Ranking ties keep ascending row order.
TopsisResult topsis_rank(const DecisionMatrix& matrix, const WeightVector& weights);

struct SelectionOutcome {
  std::size_t index = 0;   // into the candidate set
  bool tie_break_used = false;
  std::string tie_break_note;
};

/// Candidate at the top of the ranking; exact closeness ties are resolved by
/// higher source_visual_similarity, then higher cosine_to_reference, then
/// lexicographically smaller caption text.
SelectionOutcome select_best(const TopsisResult& result, const CandidateSet& candidates);

}  // namespace capsel
