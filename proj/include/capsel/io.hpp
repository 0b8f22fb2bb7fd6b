#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "capsel/candidate_selection.hpp"
#include "capsel/semantic_matching.hpp"
#include "capsel/visual_retrieval.hpp"

namespace capsel {

/// JSON Lines, one object per image: {"image_id": "...", "feature": [..]}.
/// Duplicate ids and inconsistent feature dimensions raise IngestError.
std::vector<ImageRecord> load_image_features(std::istream& in);

/// JSON Lines: {"image_id": "...", "captions": ["...", ...]}. Caption text is
/// normalized (lowercased, punctuation stripped) at ingestion.
std::unordered_map<std::string, std::vector<std::string>> load_caption_database(
    std::istream& in);

/// JSON Lines: {"image_id": "...", "tags": [{"word": ..., "prob": ...,
/// "pos": ...}, ...]}; "pos" is optional.
std::unordered_map<std::string, std::vector<TagPrediction>> load_tag_predictions(
    std::istream& in);

/// TSV `token<TAB>pos` with pos in {noun, adjective, verb, other}.
PosLexicon load_pos_lexicon(std::istream& in);

/// TSV `adjective<TAB>noun`, file order preserved per adjective.
AdjNounLexicon load_adjnoun_lexicon(std::istream& in);

/// One image id per line; blank lines ignored.
std::vector<std::string> load_query_list(std::istream& in);

/// Attach captions to feature records by image id. Records without captions
/// keep an empty caption list.
void attach_captions(std::vector<ImageRecord>& records,
                     const std::unordered_map<std::string, std::vector<std::string>>& captions);

}  // namespace capsel
