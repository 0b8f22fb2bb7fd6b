#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "capsel/dense_vector.hpp"

namespace capsel {

/// Raised when an input file or stream cannot be parsed. The message names
/// the offending line where one is known.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable token -> vector map. Tokens are lowercased at insertion and
/// lookups apply the same lowercasing, so access is case-insensitive.
/// Safe for concurrent reads once loading is done.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  /// Returns false when the token is already present (first entry wins).
  /// Throws std::invalid_argument on wrong dimension or non-finite values.
  bool insert(std::string_view token, DenseVector vector);

  /// nullptr when absent.
  const DenseVector* find(std::string_view token) const;

  bool contains(std::string_view token) const { return find(token) != nullptr; }

  const std::unordered_map<std::string, DenseVector>& entries() const { return entries_; }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, DenseVector> entries_;
};

class StopwordList {
 public:
  StopwordList() = default;
  StopwordList(std::initializer_list<std::string> tokens);

  void insert(std::string_view token);
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

 private:
  std::unordered_set<std::string> tokens_;
};

enum class EmbeddingFormat { kTsv, kBinary };

struct EmbeddingLoadStats {
  std::size_t tokens_loaded = 0;
  std::size_t duplicates_skipped = 0;
};

/// TSV: `token<TAB>c1<TAB>...<TAB>cD`, one token per line; the dimension is
/// taken from the first line. Binary: the CSEB container written by
/// write_embeddings_binary. When expected_dimension is nonzero it is
/// validated against the stream. Duplicate tokens keep the first occurrence
/// and are counted in stats. Empty streams and malformed lines raise
/// IngestError.
EmbeddingTable load_embeddings(std::istream& in, EmbeddingFormat format,
                               std::size_t expected_dimension = 0,
                               EmbeddingLoadStats* stats = nullptr);

void write_embeddings_binary(std::ostream& out, const EmbeddingTable& table);

/// One lowercase token per line; blank lines ignored.
StopwordList load_stopwords(std::istream& in);

struct CaptionVectorResult {
  DenseVector vector;
  std::size_t coverage = 0;  // tokens that actually contributed
};

/// Sum of the vectors of tokens that are neither stopwords nor missing from
/// the table. Zero coverage yields the all-zero vector.
CaptionVectorResult caption_vector(std::span<const std::string> tokens,
                                   const EmbeddingTable& table,
                                   const StopwordList& stopwords);

}  // namespace capsel
