#include "capsel/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "capsel/text.hpp"

namespace capsel {

namespace {

constexpr char kBinaryMagic[4] = {'C', 'S', 'E', 'B'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

EmbeddingTable load_embeddings_tsv(std::istream& in, std::size_t expected_dimension,
                                   EmbeddingLoadStats& stats) {
  std::string line;
  std::size_t line_number = 0;
  std::size_t dimension = expected_dimension;
  EmbeddingTable table(dimension);
  bool first = true;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                   : tab - start));
      if (tab == std::string::npos) {
        break;
      }
      start = tab + 1;
    }
    if (fields.size() < 2 || fields[0].empty()) {
      throw IngestError("embeddings: malformed line " + std::to_string(line_number));
    }
    const std::size_t found_dimension = fields.size() - 1;
    if (first) {
      if (expected_dimension != 0 && found_dimension != expected_dimension) {
        throw IngestError("embeddings: line " + std::to_string(line_number) + " has " +
                          std::to_string(found_dimension) + " components, expected " +
                          std::to_string(expected_dimension));
      }
      dimension = found_dimension;
      table = EmbeddingTable(dimension);
      first = false;
    } else if (found_dimension != dimension) {
      throw IngestError("embeddings: line " + std::to_string(line_number) + " has " +
                        std::to_string(found_dimension) + " components, expected " +
                        std::to_string(dimension));
    }
    DenseVector vector(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
      try {
        std::size_t consumed = 0;
        vector[i] = std::stod(fields[i + 1], &consumed);
        if (consumed != fields[i + 1].size()) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw IngestError("embeddings: non-numeric component on line " +
                          std::to_string(line_number));
      }
      if (!std::isfinite(vector[i])) {
        throw IngestError("embeddings: non-finite component on line " +
                          std::to_string(line_number));
      }
    }
    if (table.insert(fields[0], std::move(vector))) {
      ++stats.tokens_loaded;
    } else {
      ++stats.duplicates_skipped;
    }
  }
  if (first) {
    throw IngestError("embeddings: empty stream");
  }
  return table;
}

EmbeddingTable load_embeddings_binary(std::istream& in, std::size_t expected_dimension,
                                      EmbeddingLoadStats& stats) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0) {
    throw IngestError("embeddings: bad binary header");
  }
  std::uint32_t version = 0;
  std::uint32_t dimension = 0;
  std::uint64_t count = 0;
  if (!read_raw(in, version) || !read_raw(in, dimension) || !read_raw(in, count)) {
    throw IngestError("embeddings: truncated binary header");
  }
  if (version != kBinaryVersion) {
    throw IngestError("embeddings: unsupported binary version " + std::to_string(version));
  }
  if (expected_dimension != 0 && dimension != expected_dimension) {
    throw IngestError("embeddings: binary dimension " + std::to_string(dimension) +
                      ", expected " + std::to_string(expected_dimension));
  }
  if (count == 0) {
    throw IngestError("embeddings: empty stream");
  }
  EmbeddingTable table(dimension);
  for (std::uint64_t entry = 0; entry < count; ++entry) {
    std::uint32_t token_length = 0;
    if (!read_raw(in, token_length)) {
      throw IngestError("embeddings: truncated binary entry " + std::to_string(entry + 1));
    }
    std::string token(token_length, '\0');
    in.read(token.data(), token_length);
    DenseVector vector(dimension);
    in.read(reinterpret_cast<char*>(vector.data()),
            static_cast<std::streamsize>(dimension * sizeof(double)));
    if (!in) {
      throw IngestError("embeddings: truncated binary entry " + std::to_string(entry + 1));
    }
    for (const double x : vector) {
      if (!std::isfinite(x)) {
        throw IngestError("embeddings: non-finite component in binary entry " +
                          std::to_string(entry + 1));
      }
    }
    if (table.insert(token, std::move(vector))) {
      ++stats.tokens_loaded;
    } else {
      ++stats.duplicates_skipped;
    }
  }
  return table;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

bool EmbeddingTable::insert(std::string_view token, DenseVector vector) {
  if (vector.size() != dimension_) {
    throw std::invalid_argument("embedding dimension mismatch for token '" +
                                std::string(token) + "'");
  }
  for (const double x : vector) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("non-finite embedding component for token '" +
                                  std::string(token) + "'");
    }
  }
  return entries_.emplace(to_lower(token), std::move(vector)).second;
}

const DenseVector* EmbeddingTable::find(std::string_view token) const {
  const auto it = entries_.find(to_lower(token));
  return it == entries_.end() ? nullptr : &it->second;
}

StopwordList::StopwordList(std::initializer_list<std::string> tokens) {
  for (const auto& t : tokens) {
    insert(t);
  }
}

void StopwordList::insert(std::string_view token) { tokens_.insert(to_lower(token)); }

bool StopwordList::contains(std::string_view token) const {
  return tokens_.count(to_lower(token)) > 0;
}

EmbeddingTable load_embeddings(std::istream& in, EmbeddingFormat format,
                               std::size_t expected_dimension, EmbeddingLoadStats* stats) {
  EmbeddingLoadStats local;
  EmbeddingLoadStats& s = stats != nullptr ? *stats : local;
  switch (format) {
    case EmbeddingFormat::kTsv:
      return load_embeddings_tsv(in, expected_dimension, s);
    case EmbeddingFormat::kBinary:
      return load_embeddings_binary(in, expected_dimension, s);
  }
  throw std::invalid_argument("unknown embedding format");
}

void write_embeddings_binary(std::ostream& out, const EmbeddingTable& table) {
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  write_raw(out, kBinaryVersion);
  write_raw(out, static_cast<std::uint32_t>(table.dimension()));
  write_raw(out, static_cast<std::uint64_t>(table.size()));
  // Sorted token order keeps the container byte-deterministic.
  std::vector<const std::string*> tokens;
  tokens.reserve(table.size());
  for (const auto& [token, vector] : table.entries()) {
    tokens.push_back(&token);
  }
  std::sort(tokens.begin(), tokens.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* token : tokens) {
    const DenseVector& vector = *table.find(*token);
    write_raw(out, static_cast<std::uint32_t>(token->size()));
    out.write(token->data(), static_cast<std::streamsize>(token->size()));
    out.write(reinterpret_cast<const char*>(vector.data()),
              static_cast<std::streamsize>(vector.size() * sizeof(double)));
  }
}

StopwordList load_stopwords(std::istream& in) {
  StopwordList list;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      list.insert(line);
    }
  }
  return list;
}

CaptionVectorResult caption_vector(std::span<const std::string> tokens,
                                   const EmbeddingTable& table,
                                   const StopwordList& stopwords) {
  CaptionVectorResult result;
  result.vector.assign(table.dimension(), 0.0);
  for (const auto& token : tokens) {
    if (stopwords.contains(token)) {
      continue;
    }
    if (const DenseVector* v = table.find(token)) {
      add_in_place(result.vector, *v);
      ++result.coverage;
    }
  }
  return result;
}

}  // namespace capsel
