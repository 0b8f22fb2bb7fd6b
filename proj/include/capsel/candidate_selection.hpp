#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capsel/embedding_store.hpp"
#include "capsel/visual_retrieval.hpp"

namespace capsel {

enum class PosCategory { kNoun, kAdjective, kVerb, kUnknown };

PosCategory pos_category_from_string(std::string_view s);
std::string_view to_string(PosCategory category);

struct TagPrediction {
  std::string word;  // lowercase; may be a multi-word phrase
  double probability = 0.0;
  PosCategory category = PosCategory::kUnknown;
};

enum class ReferenceKind { kMil, kQueryExpansion };

struct Candidate {
  std::string caption;  // normalized text
  std::vector<std::string> tokens;
  DenseVector vector;
  double cosine_to_reference = 0.0;
  std::string source_image_id;
  double source_visual_similarity = 0.0;
  std::size_t coverage = 0;
};

/// Candidates sorted descending by cosine_to_reference; ties broken by
/// higher source_visual_similarity, then caption text.
struct CandidateSet {
  std::vector<Candidate> entries;
  ReferenceKind reference_kind = ReferenceKind::kMil;
};

/// Sum of the vectors of a multi-word phrase's constituent words; words
/// missing from the table are skipped. coverage counts the words found.
CaptionVectorResult phrase_vector(std::string_view phrase, const EmbeddingTable& table);

/// Unweighted sum of the vectors of tags with probability >= min_probability
/// and at least one constituent word in the table. std::nullopt (the
/// query-expansion trigger) when no tag qualifies.
std::optional<DenseVector> build_mil_vector(std::span<const TagPrediction> tags,
                                            const EmbeddingTable& table,
                                            double min_probability);

/// Fallback reference: 1/T * sum_i sum_j sim(q, I_i) * c_i^j over all T
/// retrieved (image, caption) pairs, with sim = 1 - distance/Z and Z the
/// neighborhood radius. Throws on an empty neighbor set.
DenseVector build_q_vector(const NeighborSet& neighbors, const EmbeddingTable& table,
                           const StopwordList& stopwords);

/// Vectorize every caption of every neighbor image and keep the n closest to
/// the reference by cosine similarity. Throws when the neighborhood carries
/// zero captions.
CandidateSet select_candidates(const NeighborSet& neighbors, const DenseVector& reference,
                               ReferenceKind kind, const EmbeddingTable& table,
                               const StopwordList& stopwords, std::size_t n);

}  // namespace capsel
