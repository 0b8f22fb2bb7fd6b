#include "capsel/semantic_matching.hpp"

#include <algorithm>
#include <cmath>

#include "capsel/text.hpp"

namespace capsel {

namespace {

constexpr double kCompleteMatchTolerance = 1e-9;

struct PairingOutcome {
  double similarity_sum = 0.0;
  std::size_t matched = 0;
};

/// Greedy best-first one-to-one pairing at threshold H. Candidate pairs are
/// visited by descending similarity with (query index, caption index) as the
/// deterministic tie order. snap_complete switches on the attribute rule:
/// a pair at cosine 1 (within tolerance) contributes exactly 1.
PairingOutcome greedy_pairing(const std::vector<DenseVector>& query_vectors,
                              const std::vector<DenseVector>& caption_vectors,
                              double threshold_h, bool snap_complete) {
  struct ScoredPair {
    double similarity;
    std::size_t query_index;
    std::size_t caption_index;
  };
  std::vector<ScoredPair> pairs;
  pairs.reserve(query_vectors.size() * caption_vectors.size());
  for (std::size_t qi = 0; qi < query_vectors.size(); ++qi) {
    for (std::size_t bi = 0; bi < caption_vectors.size(); ++bi) {
      const double sim = cosine_similarity(query_vectors[qi], caption_vectors[bi]);
      if (sim >= threshold_h) {
        pairs.push_back({sim, qi, bi});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.similarity != b.similarity) {
      return a.similarity > b.similarity;
    }
    if (a.query_index != b.query_index) {
      return a.query_index < b.query_index;
    }
    return a.caption_index < b.caption_index;
  });

  std::vector<bool> query_used(query_vectors.size(), false);
  std::vector<bool> caption_used(caption_vectors.size(), false);
  PairingOutcome outcome;
  for (const ScoredPair& pair : pairs) {
    if (query_used[pair.query_index] || caption_used[pair.caption_index]) {
      continue;
    }
    query_used[pair.query_index] = true;
    caption_used[pair.caption_index] = true;
    const bool complete = std::abs(pair.similarity - 1.0) <= kCompleteMatchTolerance;
    outcome.similarity_sum += (snap_complete && complete) ? 1.0 : pair.similarity;
    ++outcome.matched;
  }
  return outcome;
}

/// The matching-rate aggregate: similarity sum for matches, -1 per unmatched
/// pairing opportunity, size-difference penalty, divided by the query count.
double aggregate_score(const PairingOutcome& outcome, std::size_t query_count,
                       std::size_t caption_count) {
  if (query_count == 0) {
    return 0.0;  // criterion carries no evidence
  }
  const double q = static_cast<double>(query_count);
  const double b = static_cast<double>(caption_count);
  const double matched = static_cast<double>(outcome.matched);
  const double unmatched = std::min(b, q) - matched;
  double penalty = 0.0;
  if (query_count > caption_count) {
    penalty = 0.5;
  } else if (query_count < caption_count) {
    penalty = 1.0 / 3.0;
  }
  return (outcome.similarity_sum - unmatched - std::abs(q - b) * penalty) / q;
}

std::vector<DenseVector> vectorize_items(std::span<const std::string> items,
                                         const EmbeddingTable& table) {
  std::vector<DenseVector> vectors;
  vectors.reserve(items.size());
  for (const auto& item : items) {
    vectors.push_back(phrase_vector(item, table).vector);
  }
  return vectors;
}

std::vector<DenseVector> vectorize_pairs(std::span<const AttributePair> pairs,
                                         const EmbeddingTable& table) {
  std::vector<DenseVector> vectors;
  vectors.reserve(pairs.size());
  for (const auto& pair : pairs) {
    DenseVector v = phrase_vector(pair.adjective, table).vector;
    if (!pair.noun.empty()) {
      add_in_place(v, phrase_vector(pair.noun, table).vector);
    }
    vectors.push_back(std::move(v));
  }
  return vectors;
}

void push_unique(std::vector<std::string>& items, const std::string& value) {
  if (std::find(items.begin(), items.end(), value) == items.end()) {
    items.push_back(value);
  }
}

void push_unique(std::vector<AttributePair>& pairs, AttributePair value) {
  if (std::find(pairs.begin(), pairs.end(), value) == pairs.end()) {
    pairs.push_back(std::move(value));
  }
}

double score_candidate_column(const SlotSet& query_slots, const SlotSet& caption_slots,
                              std::size_t column, const EmbeddingTable& table,
                              const MatchParams& params) {
  switch (column) {
    case 0:
      return slot_match_score(query_slots.objects, caption_slots.objects, table, params);
    case 1:
      return attribute_match_score(query_slots.attribute_pairs, caption_slots.attribute_pairs,
                                   table, params);
    default:
      return slot_match_score(query_slots.actions, caption_slots.actions, table, params);
  }
}

DecisionMatrix make_empty_matrix(const CandidateSet& candidates) {
  DecisionMatrix matrix;
  matrix.rows = candidates.entries.size();
  matrix.cols = 3;
  matrix.values.assign(matrix.rows * matrix.cols, 0.0);
  matrix.kinds.assign(3, CriterionKind::kBenefit);
  matrix.column_labels = {"objects", "attributes", "actions"};
  matrix.row_labels.reserve(matrix.rows);
  for (const Candidate& candidate : candidates.entries) {
    matrix.row_labels.push_back(candidate.caption);
  }
  return matrix;
}

}  // namespace

LexPos lex_pos_from_string(std::string_view s) {
  if (s == "noun") {
    return LexPos::kNoun;
  }
  if (s == "adjective" || s == "adj") {
    return LexPos::kAdjective;
  }
  if (s == "verb") {
    return LexPos::kVerb;
  }
  return LexPos::kOther;
}

void PosLexicon::insert(std::string_view token, LexPos pos) {
  entries_.emplace(to_lower(token), pos);  // first entry wins
}

std::optional<LexPos> PosLexicon::lookup(std::string_view token) const {
  const auto it = entries_.find(to_lower(token));
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

void AdjNounLexicon::insert(std::string_view adjective, std::string_view noun) {
  auto& nouns = entries_[to_lower(adjective)];
  const std::string lowered = to_lower(noun);
  if (std::find(nouns.begin(), nouns.end(), lowered) == nouns.end()) {
    nouns.push_back(lowered);
  }
}

const std::vector<std::string>* AdjNounLexicon::nouns_for(std::string_view adjective) const {
  const auto it = entries_.find(to_lower(adjective));
  return it == entries_.end() ? nullptr : &it->second;
}

SlotSet extract_query_slots(std::span<const TagPrediction> tags, const PosLexicon& pos_lex,
                            const AdjNounLexicon& adjnoun_lex) {
  SlotSet slots;
  std::vector<std::string> adjectives;
  for (const TagPrediction& tag : tags) {
    PosCategory category = tag.category;
    if (category == PosCategory::kUnknown) {
      const auto lex = pos_lex.lookup(tag.word);
      if (lex == LexPos::kNoun) {
        category = PosCategory::kNoun;
      } else if (lex == LexPos::kAdjective) {
        category = PosCategory::kAdjective;
      } else if (lex == LexPos::kVerb) {
        category = PosCategory::kVerb;
      }
    }
    switch (category) {
      case PosCategory::kNoun:
        push_unique(slots.objects, tag.word);
        break;
      case PosCategory::kVerb:
        push_unique(slots.actions, tag.word);
        break;
      case PosCategory::kAdjective:
        push_unique(adjectives, tag.word);
        break;
      case PosCategory::kUnknown:
        break;  // not categorizable, dropped
    }
  }
  for (const std::string& adjective : adjectives) {
    std::string anchor;
    if (const auto* nouns = adjnoun_lex.nouns_for(adjective)) {
      for (const std::string& noun : *nouns) {
        if (std::find(slots.objects.begin(), slots.objects.end(), noun) !=
            slots.objects.end()) {
          anchor = noun;
          break;
        }
      }
    }
    push_unique(slots.attribute_pairs, AttributePair{adjective, anchor});
  }
  return slots;
}

SlotSet extract_caption_slots(std::span<const std::string> tokens, const PosLexicon& pos_lex) {
  SlotSet slots;
  std::vector<std::optional<LexPos>> pos(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    pos[i] = pos_lex.lookup(tokens[i]);
    if (pos[i] == LexPos::kNoun) {
      push_unique(slots.objects, tokens[i]);
    } else if (pos[i] == LexPos::kVerb) {
      push_unique(slots.actions, tokens[i]);
    }
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (pos[i] != LexPos::kAdjective) {
      continue;
    }
    std::string anchor;
    for (std::size_t j = i + 1; j < tokens.size() && j <= i + 3; ++j) {
      if (pos[j] == LexPos::kNoun) {
        anchor = tokens[j];
        break;
      }
    }
    if (anchor.empty()) {
      for (std::size_t back = i; back-- > 0;) {
        if (pos[back] == LexPos::kNoun) {
          anchor = tokens[back];
          break;
        }
      }
    }
    push_unique(slots.attribute_pairs, AttributePair{tokens[i], anchor});
  }
  return slots;
}

double slot_match_score(std::span<const std::string> query_items,
                        std::span<const std::string> caption_items,
                        const EmbeddingTable& table, const MatchParams& params) {
  if (query_items.empty()) {
    return 0.0;
  }
  const auto outcome = greedy_pairing(vectorize_items(query_items, table),
                                      vectorize_items(caption_items, table),
                                      params.threshold_h, /*snap_complete=*/false);
  return aggregate_score(outcome, query_items.size(), caption_items.size());
}

double attribute_match_score(std::span<const AttributePair> query_pairs,
                             std::span<const AttributePair> caption_pairs,
                             const EmbeddingTable& table, const MatchParams& params) {
  if (query_pairs.empty()) {
    return 0.0;
  }
  const auto outcome = greedy_pairing(vectorize_pairs(query_pairs, table),
                                      vectorize_pairs(caption_pairs, table),
                                      params.threshold_h, /*snap_complete=*/true);
  return aggregate_score(outcome, query_pairs.size(), caption_pairs.size());
}

DecisionMatrix build_decision_matrix(const SlotSet& query_slots, const CandidateSet& candidates,
                                     const EmbeddingTable& table, const PosLexicon& pos_lex,
                                     const MatchParams& params) {
  if (candidates.entries.empty()) {
    throw std::invalid_argument("build_decision_matrix: empty candidate set");
  }
  DecisionMatrix matrix = make_empty_matrix(candidates);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(matrix.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto row = static_cast<std::size_t>(i);
    const SlotSet caption_slots =
        extract_caption_slots(candidates.entries[row].tokens, pos_lex);
    for (std::size_t j = 0; j < 3; ++j) {
      matrix.at(row, j) = score_candidate_column(query_slots, caption_slots, j, table, params);
    }
  }
  return matrix;
}

DecisionMatrix build_decision_matrix_serial(const SlotSet& query_slots,
                                            const CandidateSet& candidates,
                                            const EmbeddingTable& table,
                                            const PosLexicon& pos_lex,
                                            const MatchParams& params) {
  if (candidates.entries.empty()) {
    throw std::invalid_argument("build_decision_matrix: empty candidate set");
  }
  DecisionMatrix matrix = make_empty_matrix(candidates);
  for (std::size_t row = 0; row < matrix.rows; ++row) {
    const SlotSet caption_slots =
        extract_caption_slots(candidates.entries[row].tokens, pos_lex);
    for (std::size_t j = 0; j < 3; ++j) {
      matrix.at(row, j) = score_candidate_column(query_slots, caption_slots, j, table, params);
    }
  }
  return matrix;
}

}  // namespace capsel
