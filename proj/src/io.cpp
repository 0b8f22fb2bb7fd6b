#include "capsel/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <unordered_set>

#include <json.hpp>

#include "capsel/text.hpp"

namespace capsel {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const char* what, std::size_t line_number) {
  json parsed = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw IngestError(std::string(what) + ": malformed JSON on line " +
                      std::to_string(line_number));
  }
  return parsed;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    fn(line, line_number);
  }
}

}  // namespace

std::vector<ImageRecord> load_image_features(std::istream& in) {
  std::vector<ImageRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t dimension = 0;
  for_each_line(in, [&](const std::string& line, std::size_t line_number) {
    const json object = parse_line(line, "image features", line_number);
    if (!object.contains("image_id") || !object["image_id"].is_string() ||
        !object.contains("feature") || !object["feature"].is_array()) {
      throw IngestError("image features: missing image_id/feature on line " +
                        std::to_string(line_number));
    }
    ImageRecord record;
    record.image_id = object["image_id"].get<std::string>();
    if (!seen.insert(record.image_id).second) {
      throw IngestError("image features: duplicate image_id '" + record.image_id +
                        "' on line " + std::to_string(line_number));
    }
    for (const auto& value : object["feature"]) {
      if (!value.is_number()) {
        throw IngestError("image features: non-numeric component on line " +
                          std::to_string(line_number));
      }
      record.feature.push_back(value.get<double>());
    }
    if (record.feature.empty() || !std::all_of(record.feature.begin(), record.feature.end(),
                                               [](double x) { return std::isfinite(x); })) {
      throw IngestError("image features: empty or non-finite feature on line " +
                        std::to_string(line_number));
    }
    if (dimension == 0) {
      dimension = record.feature.size();
    } else if (record.feature.size() != dimension) {
      throw IngestError("image features: dimension mismatch on line " +
                        std::to_string(line_number));
    }
    records.push_back(std::move(record));
  });
  if (records.empty()) {
    throw IngestError("image features: empty stream");
  }
  return records;
}

std::unordered_map<std::string, std::vector<std::string>> load_caption_database(
    std::istream& in) {
  std::unordered_map<std::string, std::vector<std::string>> captions;
  for_each_line(in, [&](const std::string& line, std::size_t line_number) {
    const json object = parse_line(line, "captions", line_number);
    if (!object.contains("image_id") || !object["image_id"].is_string() ||
        !object.contains("captions") || !object["captions"].is_array()) {
      throw IngestError("captions: missing image_id/captions on line " +
                        std::to_string(line_number));
    }
    auto& list = captions[object["image_id"].get<std::string>()];
    for (const auto& caption : object["captions"]) {
      if (!caption.is_string()) {
        throw IngestError("captions: non-string caption on line " +
                          std::to_string(line_number));
      }
      std::string normalized = normalize_caption(caption.get<std::string>());
      if (!normalized.empty()) {
        list.push_back(std::move(normalized));
      }
    }
  });
  return captions;
}

std::unordered_map<std::string, std::vector<TagPrediction>> load_tag_predictions(
    std::istream& in) {
  std::unordered_map<std::string, std::vector<TagPrediction>> tags;
  for_each_line(in, [&](const std::string& line, std::size_t line_number) {
    const json object = parse_line(line, "tags", line_number);
    if (!object.contains("image_id") || !object["image_id"].is_string() ||
        !object.contains("tags") || !object["tags"].is_array()) {
      throw IngestError("tags: missing image_id/tags on line " + std::to_string(line_number));
    }
    auto& list = tags[object["image_id"].get<std::string>()];
    for (const auto& entry : object["tags"]) {
      if (!entry.is_object() || !entry.contains("word") || !entry["word"].is_string() ||
          !entry.contains("prob") || !entry["prob"].is_number()) {
        throw IngestError("tags: malformed tag entry on line " + std::to_string(line_number));
      }
      TagPrediction tag;
      tag.word = to_lower(entry["word"].get<std::string>());
      tag.probability = entry["prob"].get<double>();
      if (tag.probability < 0.0 || tag.probability > 1.0) {
        throw IngestError("tags: probability out of [0, 1] on line " +
                          std::to_string(line_number));
      }
      if (entry.contains("pos") && entry["pos"].is_string()) {
        tag.category = pos_category_from_string(entry["pos"].get<std::string>());
      }
      list.push_back(std::move(tag));
    }
  });
  return tags;
}

PosLexicon load_pos_lexicon(std::istream& in) {
  PosLexicon lexicon;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw IngestError("pos lexicon: malformed line " + std::to_string(line_number));
    }
    lexicon.insert(line.substr(0, tab), lex_pos_from_string(line.substr(tab + 1)));
  }
  return lexicon;
}

AdjNounLexicon load_adjnoun_lexicon(std::istream& in) {
  AdjNounLexicon lexicon;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw IngestError("adjective-noun lexicon: malformed line " +
                        std::to_string(line_number));
    }
    lexicon.insert(line.substr(0, tab), line.substr(tab + 1));
  }
  return lexicon;
}

std::vector<std::string> load_query_list(std::istream& in) {
  std::vector<std::string> queries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      queries.push_back(line);
    }
  }
  return queries;
}

void attach_captions(std::vector<ImageRecord>& records,
                     const std::unordered_map<std::string, std::vector<std::string>>& captions) {
  for (ImageRecord& record : records) {
    const auto it = captions.find(record.image_id);
    if (it != captions.end()) {
      record.captions = it->second;
    }
  }
}

}  // namespace capsel
