#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "capsel/candidate_selection.hpp"
#include "capsel/embedding_store.hpp"
#include "capsel/eval_metrics.hpp"
#include "capsel/io.hpp"
#include "capsel/mcdm.hpp"
#include "capsel/semantic_matching.hpp"
#include "capsel/visual_retrieval.hpp"

namespace capsel {

struct PipelineConfig {
  double epsilon = 0.15;
  int max_images = 100;
  int n_candidates = 50;
  double threshold_H = 0.85;
  double min_tag_probability = 0.0;
  int embedding_dimension = 500;
  int workers = 1;
  std::string embedding_format = "tsv";  // tsv | binary

  std::string embeddings;
  std::string stopwords;
  std::string pos_lexicon;
  std::string adjnoun_lexicon;
  std::string image_features;
  std::string caption_database;
  std::string tag_predictions;
  std::string query_list;

  bool operator==(const PipelineConfig&) const = default;
};

void to_json(nlohmann::json& j, const PipelineConfig& config);
void from_json(const nlohmann::json& j, PipelineConfig& config);

/// Numeric-range validation; throws std::invalid_argument with the offending
/// field name.
void validate_config(const PipelineConfig& config);

/// Parse and validate a config file. Relative data paths are resolved
/// against the config file's directory.
PipelineConfig load_config_file(const std::string& path);

struct NeighborSummary {
  std::string image_id;
  double distance = 0.0;
  double similarity = 0.0;
};

/// Full per-query decision record; detailed enough to replay the selection
/// by hand.
struct SelectionReport {
  std::string query_image_id;

  bool failed = false;
  std::string error;

  std::string branch;  // "mil" | "query_expansion"
  bool excluded_self = false;
  double closest_distance = 0.0;
  double radius = 0.0;
  double normalizer_z = 0.0;
  std::vector<NeighborSummary> neighbors;

  SlotSet query_slots;
  std::size_t reference_coverage = 0;  // qualifying tags (mil branch)

  CandidateSet candidates;

  bool single_candidate = false;  // m == 1 short-circuit; matrix/weights absent

  DecisionMatrix matrix;          // pre-shift
  DecisionMatrix shifted_matrix;  // what entropy/TOPSIS actually consumed
  std::vector<double> column_shifts;
  WeightVector weights;
  TopsisResult topsis;

  std::vector<std::string> tie_breaks;

  std::string chosen_caption;
  std::string chosen_source_image_id;
};

nlohmann::ordered_json report_to_json(const SelectionReport& report);

/// Partial inverse of report_to_json: recovers the fields evaluation and
/// inspection need (id, error state, decision artifacts, chosen caption).
SelectionReport report_from_json(const nlohmann::json& j);

/// Loaded, immutable stores plus the per-query decision procedure. Queries
/// are independent and may run in parallel.
class Pipeline {
 public:
  /// Opens every input named by the config; throws IngestError or
  /// std::invalid_argument on any startup problem.
  static Pipeline load(const PipelineConfig& config);

  /// One query end to end. Throws on per-query errors (unknown id); run()
  /// turns those into failed reports.
  SelectionReport run_query(const std::string& image_id) const;

  /// All queries, worker-parallel, reports in query order regardless of
  /// completion order. Per-query failures become failed reports.
  std::vector<SelectionReport> run(const std::vector<std::string>& query_ids,
                                   int workers) const;

  const PipelineConfig& config() const { return config_; }
  const std::vector<ImageRecord>& store() const { return store_; }
  const std::vector<std::string>& default_queries() const { return default_queries_; }
  const std::unordered_map<std::string, std::vector<std::string>>& caption_database() const {
    return captions_;
  }

 private:
  Pipeline() = default;

  PipelineConfig config_;
  EmbeddingTable table_{0};
  StopwordList stopwords_;
  PosLexicon pos_lexicon_;
  AdjNounLexicon adjnoun_lexicon_;
  std::vector<ImageRecord> store_;
  std::unordered_map<std::string, std::vector<std::string>> captions_;
  std::unordered_map<std::string, std::vector<TagPrediction>> tags_;
  std::unordered_map<std::string, const ImageRecord*> by_id_;
  std::vector<std::string> default_queries_;
};

/// Corpus metrics of the chosen captions against each query's references.
/// Failed reports are skipped and counted; a successful report without
/// references is an error naming the image id.
EvalReport evaluate(const std::vector<SelectionReport>& reports,
                    const std::unordered_map<std::string, std::vector<std::string>>& references);

nlohmann::ordered_json eval_report_to_json(const EvalReport& report);

}  // namespace capsel
