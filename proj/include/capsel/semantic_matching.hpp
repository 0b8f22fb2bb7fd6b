#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "capsel/candidate_selection.hpp"
#include "capsel/embedding_store.hpp"
#include "capsel/mcdm.hpp"

namespace capsel {

enum class LexPos { kNoun, kAdjective, kVerb, kOther };

LexPos lex_pos_from_string(std::string_view s);

/// Frequency lexicon: one part of speech per token (the most frequent one in
/// the source corpus).
class PosLexicon {
 public:
  void insert(std::string_view token, LexPos pos);
  std::optional<LexPos> lookup(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, LexPos> entries_;
};

/// Adjective -> observed noun pairings, in file order.
class AdjNounLexicon {
 public:
  void insert(std::string_view adjective, std::string_view noun);
  const std::vector<std::string>* nouns_for(std::string_view adjective) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

struct AttributePair {
  std::string adjective;
  std::string noun;  // empty when the adjective could not be anchored

  bool operator==(const AttributePair&) const = default;
};

/// Extracted comparison units: nouns, verbs and adjective-noun pairs.
/// Duplicates are collapsed, first occurrence kept.
struct SlotSet {
  std::vector<std::string> objects;
  std::vector<std::string> actions;
  std::vector<AttributePair> attribute_pairs;

  bool empty() const { return objects.empty() && actions.empty() && attribute_pairs.empty(); }
};

struct MatchParams {
  double threshold_h = 0.85;  // minimum cosine for a pairing to count
};

/// Slots of the query's predicted tags. A tag's category comes from its own
/// pos field when known, else the lexicon; otherwise the tag is dropped.
/// Adjectives anchor to the first lexicon noun present among this query's
/// own object tags; unanchored adjectives keep an empty noun slot.
SlotSet extract_query_slots(std::span<const TagPrediction> tags, const PosLexicon& pos_lex,
                            const AdjNounLexicon& adjnoun_lex);

/// Slots of a tokenized caption via lexicon lookup. An adjective anchors to
/// the nearest following noun within 3 tokens, else the nearest preceding
/// noun anywhere in the caption.
SlotSet extract_caption_slots(std::span<const std::string> tokens, const PosLexicon& pos_lex);

/// Matching rate between query items and caption items: greedy best-first
/// one-to-one pairing over cross cosine similarities at threshold H, matched
/// similarities summed, unmatched pairs scored -1, and a size-difference
/// penalty of 1/2 (query larger) or 1/3 (caption larger) per missing item,
/// all divided by the query item count. An empty query side scores 0.
double slot_match_score(std::span<const std::string> query_items,
                        std::span<const std::string> caption_items,
                        const EmbeddingTable& table, const MatchParams& params);

/// Same aggregate over adjective-noun pairs vectorized as the sum of their
/// two word vectors; a complete match (cosine 1 within 1e-9) contributes
/// exactly 1.
double attribute_match_score(std::span<const AttributePair> query_pairs,
                             std::span<const AttributePair> caption_pairs,
                             const EmbeddingTable& table, const MatchParams& params);

/// |candidates| x 3 benefit matrix with columns [objects, attributes,
/// actions]; rows follow candidate order. Rows are scored in parallel.
DecisionMatrix build_decision_matrix(const SlotSet& query_slots, const CandidateSet& candidates,
                                     const EmbeddingTable& table, const PosLexicon& pos_lex,
                                     const MatchParams& params);

/// Single-threaded reference with identical semantics.
DecisionMatrix build_decision_matrix_serial(const SlotSet& query_slots,
                                            const CandidateSet& candidates,
                                            const EmbeddingTable& table,
                                            const PosLexicon& pos_lex,
                                            const MatchParams& params);

}  // namespace capsel
