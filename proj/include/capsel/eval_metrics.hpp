#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace capsel {

using TokenList = std::vector<std::string>;

/// Length of the longest common subsequence of two token sequences.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Corpus BLEU-1..4: clipped modified n-gram precisions aggregated over the
/// whole corpus, geometric mean over orders <= n, and a single brevity
/// penalty exp(1 - r/c) for c < r with r summed from the per-segment
/// reference length closest to the candidate (ties to the shorter). No
/// smoothing; any zero aggregate precision zeroes the affected orders.
/// Throws on an empty candidate list or a size mismatch with references.
std::array<double, 4> corpus_bleu(const std::vector<TokenList>& candidates,
                                  const std::vector<std::vector<TokenList>>& references);

/// Per-sentence BLEU-1..4 with add-epsilon smoothed precisions. Display-only
/// companion for per-image rows; not the corpus definition.
std::array<double, 4> sentence_bleu_smoothed(const TokenList& candidate,
                                             const std::vector<TokenList>& references);

/// LCS F-measure with beta = 1.2 following the COCO evaluation convention:
/// precision and recall are each maximized over the references before being
/// combined. An empty candidate scores 0.
double rouge_l(std::span<const std::string> candidate,
               const std::vector<TokenList>& references, double beta = 1.2);

struct PerImageMetrics {
  std::string image_id;
  std::array<double, 4> bleu_smoothed{};  // non-canonical, display only
  double rouge_l = 0.0;
};

struct EvalReport {
  std::array<double, 4> bleu{};  // corpus BLEU-1..4
  double rouge_l = 0.0;          // mean over images
  std::vector<PerImageMetrics> per_image;
  std::size_t corpus_size = 0;
  std::size_t skipped = 0;  // failed queries excluded from scoring
};

}  // namespace capsel
