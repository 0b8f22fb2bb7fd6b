#include "capsel/candidate_selection.hpp"

#include <algorithm>
#include <stdexcept>

#include "capsel/text.hpp"

namespace capsel {

PosCategory pos_category_from_string(std::string_view s) {
  if (s == "noun") {
    return PosCategory::kNoun;
  }
  if (s == "adjective" || s == "adj") {
    return PosCategory::kAdjective;
  }
  if (s == "verb") {
    return PosCategory::kVerb;
  }
  return PosCategory::kUnknown;
}

std::string_view to_string(PosCategory category) {
  switch (category) {
    case PosCategory::kNoun:
      return "noun";
    case PosCategory::kAdjective:
      return "adjective";
    case PosCategory::kVerb:
      return "verb";
    case PosCategory::kUnknown:
      return "unknown";
  }
  return "unknown";
}

CaptionVectorResult phrase_vector(std::string_view phrase, const EmbeddingTable& table) {
  CaptionVectorResult result;
  result.vector.assign(table.dimension(), 0.0);
  for (const auto& word : tokenize(phrase)) {
    if (const DenseVector* v = table.find(word)) {
      add_in_place(result.vector, *v);
      ++result.coverage;
    }
  }
  return result;
}

std::optional<DenseVector> build_mil_vector(std::span<const TagPrediction> tags,
                                            const EmbeddingTable& table,
                                            double min_probability) {
  DenseVector sum(table.dimension(), 0.0);
  bool any = false;
  for (const auto& tag : tags) {
    if (tag.probability < min_probability) {
      continue;
    }
    const CaptionVectorResult tag_vector = phrase_vector(tag.word, table);
    if (tag_vector.coverage == 0) {
      continue;
    }
    add_in_place(sum, tag_vector.vector);
    any = true;
  }
  if (!any) {
    return std::nullopt;
  }
  return sum;
}

DenseVector build_q_vector(const NeighborSet& neighbors, const EmbeddingTable& table,
                           const StopwordList& stopwords) {
  if (neighbors.entries.empty()) {
    throw std::invalid_argument("build_q_vector: empty neighbor set");
  }
  const double z = pipeline_normalizer(neighbors);
  DenseVector accum(table.dimension(), 0.0);
  std::size_t total_pairs = 0;
  for (const Neighbor& neighbor : neighbors.entries) {
    const double sim = similarity_from_distance(neighbor.distance, z);
    for (const std::string& caption : neighbor.record->captions) {
      const auto tokens = tokenize(caption);
      CaptionVectorResult cv = caption_vector(tokens, table, stopwords);
      scale_in_place(cv.vector, sim);
      add_in_place(accum, cv.vector);
      ++total_pairs;
    }
  }
  if (total_pairs == 0) {
    throw std::invalid_argument("build_q_vector: neighborhood carries no captions");
  }
  scale_in_place(accum, 1.0 / static_cast<double>(total_pairs));
  return accum;
}

CandidateSet select_candidates(const NeighborSet& neighbors, const DenseVector& reference,
                               ReferenceKind kind, const EmbeddingTable& table,
                               const StopwordList& stopwords, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("select_candidates: n must be >= 1");
  }
  const double z = pipeline_normalizer(neighbors);

  CandidateSet set;
  set.reference_kind = kind;
  for (const Neighbor& neighbor : neighbors.entries) {
    const double sim = similarity_from_distance(neighbor.distance, z);
    for (const std::string& caption : neighbor.record->captions) {
      Candidate candidate;
      candidate.caption = caption;
      candidate.tokens = tokenize(caption);
      candidate.source_image_id = neighbor.record->image_id;
      candidate.source_visual_similarity = sim;
      set.entries.push_back(std::move(candidate));
    }
  }
  if (set.entries.empty()) {
    throw std::invalid_argument("select_candidates: zero captions in the neighborhood");
  }

  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(set.entries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    Candidate& candidate = set.entries[static_cast<std::size_t>(i)];
    CaptionVectorResult cv = caption_vector(candidate.tokens, table, stopwords);
    candidate.coverage = cv.coverage;
    candidate.cosine_to_reference = cosine_similarity(cv.vector, reference);
    candidate.vector = std::move(cv.vector);
  }

  std::sort(set.entries.begin(), set.entries.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cosine_to_reference != b.cosine_to_reference) {
      return a.cosine_to_reference > b.cosine_to_reference;
    }
    if (a.source_visual_similarity != b.source_visual_similarity) {
      return a.source_visual_similarity > b.source_visual_similarity;
    }
    return a.caption < b.caption;
  });
  if (set.entries.size() > n) {
    set.entries.resize(n);
  }
  return set;
}

}  // namespace capsel
