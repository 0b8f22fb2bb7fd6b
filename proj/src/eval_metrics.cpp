#include "capsel/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace capsel {

namespace {

constexpr int kMaxOrder = 4;

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, int order) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < order) {
    return counts;
  }
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(i) + order);
    ++counts[std::move(gram)];
  }
  return counts;
}

struct PrecisionTally {
  std::size_t matched = 0;  // clipped matches
  std::size_t total = 0;    // candidate n-grams
};

PrecisionTally tally_order(const TokenList& candidate, const std::vector<TokenList>& references,
                           int order) {
  PrecisionTally tally;
  const NgramCounts candidate_counts = count_ngrams(candidate, order);
  NgramCounts max_reference_counts;
  for (const TokenList& reference : references) {
    for (const auto& [gram, count] : count_ngrams(reference, order)) {
      auto& best = max_reference_counts[gram];
      best = std::max(best, count);
    }
  }
  for (const auto& [gram, count] : candidate_counts) {
    tally.total += count;
    const auto it = max_reference_counts.find(gram);
    if (it != max_reference_counts.end()) {
      tally.matched += std::min(count, it->second);
    }
  }
  return tally;
}

std::size_t closest_reference_length(std::size_t candidate_length,
                                     const std::vector<TokenList>& references) {
  std::size_t best = references.front().size();
  for (const TokenList& reference : references) {
    const auto length = reference.size();
    const auto diff = [&](std::size_t r) {
      return r > candidate_length ? r - candidate_length : candidate_length - r;
    };
    if (diff(length) < diff(best) || (diff(length) == diff(best) && length < best)) {
      best = length;
    }
  }
  return best;
}

std::array<double, 4> bleu_from_tallies(const std::array<PrecisionTally, 4>& tallies,
                                        std::size_t candidate_length,
                                        std::size_t reference_length, bool smoothed) {
  double brevity = 1.0;
  if (candidate_length == 0) {
    brevity = 0.0;
  } else if (candidate_length < reference_length) {
    brevity = std::exp(1.0 - static_cast<double>(reference_length) /
                                 static_cast<double>(candidate_length));
  }

  std::array<double, 4> result{};
  double log_sum = 0.0;
  bool zero_seen = false;
  for (int order = 1; order <= kMaxOrder; ++order) {
    const PrecisionTally& tally = tallies[static_cast<std::size_t>(order - 1)];
    double precision = 0.0;
    if (smoothed) {
      // Tiny numerator, larger denominator so absent orders land near zero.
      precision = (static_cast<double>(tally.matched) + 1e-15) /
                  (static_cast<double>(tally.total) + 1e-9);
    } else if (tally.total > 0 && tally.matched > 0) {
      precision = static_cast<double>(tally.matched) / static_cast<double>(tally.total);
    }
    if (precision <= 0.0) {
      zero_seen = true;
    } else {
      log_sum += std::log(precision);
    }
    result[static_cast<std::size_t>(order - 1)] =
        zero_seen ? 0.0 : brevity * std::exp(log_sum / order);
  }
  return result;
}

}  // namespace

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) {
    return 0;
  }
  // Two-row dynamic program.
  std::vector<std::size_t> previous(b.size() + 1, 0);
  std::vector<std::size_t> current(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        current[j] = previous[j - 1] + 1;
      } else {
        current[j] = std::max(previous[j], current[j - 1]);
      }
    }
    std::swap(previous, current);
  }
  return previous[b.size()];
}

std::array<double, 4> corpus_bleu(const std::vector<TokenList>& candidates,
                                  const std::vector<std::vector<TokenList>>& references) {
  if (candidates.empty()) {
    throw std::invalid_argument("corpus_bleu: empty candidate list");
  }
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("corpus_bleu: candidate/reference count mismatch");
  }
  std::array<PrecisionTally, 4> tallies{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) {
      throw std::invalid_argument("corpus_bleu: segment " + std::to_string(i) +
                                  " has no references");
    }
    candidate_length += candidates[i].size();
    reference_length += closest_reference_length(candidates[i].size(), references[i]);
    for (int order = 1; order <= kMaxOrder; ++order) {
      const PrecisionTally segment = tally_order(candidates[i], references[i], order);
      tallies[static_cast<std::size_t>(order - 1)].matched += segment.matched;
      tallies[static_cast<std::size_t>(order - 1)].total += segment.total;
    }
  }
  return bleu_from_tallies(tallies, candidate_length, reference_length,
                           /*smoothed=*/false);
}

std::array<double, 4> sentence_bleu_smoothed(const TokenList& candidate,
                                             const std::vector<TokenList>& references) {
  if (references.empty()) {
    throw std::invalid_argument("sentence_bleu_smoothed: no references");
  }
  std::array<PrecisionTally, 4> tallies{};
  for (int order = 1; order <= kMaxOrder; ++order) {
    tallies[static_cast<std::size_t>(order - 1)] = tally_order(candidate, references, order);
  }
  return bleu_from_tallies(tallies, candidate.size(),
                           closest_reference_length(candidate.size(), references),
                           /*smoothed=*/true);
}

double rouge_l(std::span<const std::string> candidate,
               const std::vector<TokenList>& references, double beta) {
  if (candidate.empty()) {
    return 0.0;
  }
  if (references.empty()) {
    throw std::invalid_argument("rouge_l: no references");
  }
  double best_precision = 0.0;
  double best_recall = 0.0;
  for (const TokenList& reference : references) {
    if (reference.empty()) {
      continue;
    }
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    best_precision = std::max(best_precision, lcs / static_cast<double>(candidate.size()));
    best_recall = std::max(best_recall, lcs / static_cast<double>(reference.size()));
  }
  if (best_precision == 0.0 || best_recall == 0.0) {
    return 0.0;
  }
  const double beta_sq = beta * beta;
  return (1.0 + beta_sq) * best_precision * best_recall /
         (best_recall + beta_sq * best_precision);
}

}  // namespace capsel
