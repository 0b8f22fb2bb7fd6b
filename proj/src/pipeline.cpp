#include "capsel/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capsel/text.hpp"

namespace capsel {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ifstream open_or_throw(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw IngestError("cannot open input file: " + path);
  }
  return in;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    j.at(key).get_to(out);
  }
}

/// Post-sort tie detection over adjacent entries with equal primary keys.
template <typename It, typename KeyFn>
std::size_t count_adjacent_ties(It begin, It end, KeyFn key) {
  std::size_t ties = 0;
  for (It it = begin; it != end; ++it) {
    const It next = std::next(it);
    if (next != end && key(*it) == key(*next)) {
      ++ties;
    }
  }
  return ties;
}

ordered_json matrix_values_json(const DecisionMatrix& matrix) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < matrix.cols; ++j) {
      row.push_back(matrix.at(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json slots_json(const SlotSet& slots) {
  ordered_json out;
  out["objects"] = slots.objects;
  out["actions"] = slots.actions;
  ordered_json pairs = ordered_json::array();
  for (const AttributePair& pair : slots.attribute_pairs) {
    pairs.push_back(ordered_json::array({pair.adjective, pair.noun}));
  }
  out["attribute_pairs"] = std::move(pairs);
  return out;
}

}  // namespace

void to_json(json& j, const PipelineConfig& config) {
  j = json{{"epsilon", config.epsilon},
           {"max_images", config.max_images},
           {"n_candidates", config.n_candidates},
           {"threshold_H", config.threshold_H},
           {"min_tag_probability", config.min_tag_probability},
           {"embedding_dimension", config.embedding_dimension},
           {"workers", config.workers},
           {"embedding_format", config.embedding_format},
           {"embeddings", config.embeddings},
           {"stopwords", config.stopwords},
           {"pos_lexicon", config.pos_lexicon},
           {"adjnoun_lexicon", config.adjnoun_lexicon},
           {"image_features", config.image_features},
           {"caption_database", config.caption_database},
           {"tag_predictions", config.tag_predictions},
           {"query_list", config.query_list}};
}

void from_json(const json& j, PipelineConfig& config) {
  read_field(j, "epsilon", config.epsilon);
  read_field(j, "max_images", config.max_images);
  read_field(j, "n_candidates", config.n_candidates);
  read_field(j, "threshold_H", config.threshold_H);
  read_field(j, "min_tag_probability", config.min_tag_probability);
  read_field(j, "embedding_dimension", config.embedding_dimension);
  read_field(j, "workers", config.workers);
  read_field(j, "embedding_format", config.embedding_format);
  read_field(j, "embeddings", config.embeddings);
  read_field(j, "stopwords", config.stopwords);
  read_field(j, "pos_lexicon", config.pos_lexicon);
  read_field(j, "adjnoun_lexicon", config.adjnoun_lexicon);
  read_field(j, "image_features", config.image_features);
  read_field(j, "caption_database", config.caption_database);
  read_field(j, "tag_predictions", config.tag_predictions);
  read_field(j, "query_list", config.query_list);
}

void validate_config(const PipelineConfig& config) {
  if (config.epsilon < 0.0) {
    throw std::invalid_argument("config: epsilon must be >= 0");
  }
  if (config.max_images < 1) {
    throw std::invalid_argument("config: max_images must be >= 1");
  }
  if (config.n_candidates < 1) {
    throw std::invalid_argument("config: n_candidates must be >= 1");
  }
  if (config.threshold_H <= 0.0 || config.threshold_H > 1.0) {
    throw std::invalid_argument("config: threshold_H must lie in (0, 1]");
  }
  if (config.min_tag_probability < 0.0 || config.min_tag_probability > 1.0) {
    throw std::invalid_argument("config: min_tag_probability must lie in [0, 1]");
  }
  if (config.embedding_dimension < 1) {
    throw std::invalid_argument("config: embedding_dimension must be >= 1");
  }
  if (config.workers < 1) {
    throw std::invalid_argument("config: workers must be >= 1");
  }
  if (config.embedding_format != "tsv" && config.embedding_format != "binary") {
    throw std::invalid_argument("config: embedding_format must be 'tsv' or 'binary'");
  }
  const struct {
    const char* name;
    const std::string& value;
  } paths[] = {
      {"embeddings", config.embeddings},
      {"stopwords", config.stopwords},
      {"pos_lexicon", config.pos_lexicon},
      {"adjnoun_lexicon", config.adjnoun_lexicon},
      {"image_features", config.image_features},
      {"caption_database", config.caption_database},
      {"tag_predictions", config.tag_predictions},
  };
  for (const auto& [name, value] : paths) {
    if (value.empty()) {
      throw std::invalid_argument(std::string("config: missing path for ") + name);
    }
  }
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  json parsed = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw IngestError("config: malformed JSON in " + path);
  }
  PipelineConfig config = parsed.get<PipelineConfig>();

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&base](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) {
      p = (base / p).string();
    }
  };
  resolve(config.embeddings);
  resolve(config.stopwords);
  resolve(config.pos_lexicon);
  resolve(config.adjnoun_lexicon);
  resolve(config.image_features);
  resolve(config.caption_database);
  resolve(config.tag_predictions);
  resolve(config.query_list);

  validate_config(config);
  return config;
}

ordered_json report_to_json(const SelectionReport& report) {
  ordered_json out;
  out["image_id"] = report.query_image_id;
  if (report.failed) {
    out["error"] = report.error;
    return out;
  }
  out["branch"] = report.branch;

  ordered_json neighborhood;
  neighborhood["count"] = report.neighbors.size();
  neighborhood["closest_distance"] = report.closest_distance;
  neighborhood["radius"] = report.radius;
  neighborhood["normalizer_z"] = report.normalizer_z;
  neighborhood["excluded_self"] = report.excluded_self;
  ordered_json entries = ordered_json::array();
  for (const NeighborSummary& neighbor : report.neighbors) {
    ordered_json entry;
    entry["image_id"] = neighbor.image_id;
    entry["distance"] = neighbor.distance;
    entry["similarity"] = neighbor.similarity;
    entries.push_back(std::move(entry));
  }
  neighborhood["entries"] = std::move(entries);
  out["neighborhood"] = std::move(neighborhood);

  out["query_slots"] = slots_json(report.query_slots);
  out["reference_coverage"] = report.reference_coverage;

  ordered_json candidates = ordered_json::array();
  for (const Candidate& candidate : report.candidates.entries) {
    ordered_json entry;
    entry["caption"] = candidate.caption;
    entry["source_image_id"] = candidate.source_image_id;
    entry["source_visual_similarity"] = candidate.source_visual_similarity;
    entry["cosine_to_reference"] = candidate.cosine_to_reference;
    entry["coverage"] = candidate.coverage;
    candidates.push_back(std::move(entry));
  }
  out["candidates"] = std::move(candidates);

  if (report.single_candidate) {
    out["single_candidate"] = true;
  } else {
    ordered_json matrix;
    matrix["columns"] = report.matrix.column_labels;
    matrix["values"] = matrix_values_json(report.matrix);
    matrix["column_shifts"] = report.column_shifts;
    matrix["shifted_values"] = matrix_values_json(report.shifted_matrix);
    out["decision_matrix"] = std::move(matrix);
    out["entropy_weights"] = report.weights.weights;

    ordered_json topsis;
    topsis["closeness"] = report.topsis.closeness;
    topsis["ranking"] = report.topsis.ranking;
    topsis["ideal"] = report.topsis.ideal;
    topsis["anti_ideal"] = report.topsis.anti_ideal;
    topsis["separation_plus"] = report.topsis.separation_plus;
    topsis["separation_minus"] = report.topsis.separation_minus;
    out["topsis"] = std::move(topsis);
  }

  out["tie_breaks"] = report.tie_breaks;
  out["chosen_caption"] = report.chosen_caption;
  out["chosen_source_image_id"] = report.chosen_source_image_id;
  return out;
}

SelectionReport report_from_json(const nlohmann::json& j) {
  SelectionReport report;
  report.query_image_id = j.value("image_id", std::string{});
  if (j.contains("error")) {
    report.failed = true;
    report.error = j["error"].get<std::string>();
    return report;
  }
  report.branch = j.value("branch", std::string{});
  if (j.contains("neighborhood")) {
    const auto& neighborhood = j["neighborhood"];
    report.closest_distance = neighborhood.value("closest_distance", 0.0);
    report.radius = neighborhood.value("radius", 0.0);
    report.normalizer_z = neighborhood.value("normalizer_z", 0.0);
    report.excluded_self = neighborhood.value("excluded_self", false);
    if (neighborhood.contains("entries")) {
      for (const auto& entry : neighborhood["entries"]) {
        report.neighbors.push_back({entry.value("image_id", std::string{}),
                                    entry.value("distance", 0.0),
                                    entry.value("similarity", 0.0)});
      }
    }
  }
  if (j.contains("candidates")) {
    for (const auto& entry : j["candidates"]) {
      Candidate candidate;
      candidate.caption = entry.value("caption", std::string{});
      candidate.source_image_id = entry.value("source_image_id", std::string{});
      candidate.source_visual_similarity = entry.value("source_visual_similarity", 0.0);
      candidate.cosine_to_reference = entry.value("cosine_to_reference", 0.0);
      candidate.coverage = entry.value("coverage", std::size_t{0});
      report.candidates.entries.push_back(std::move(candidate));
    }
  }
  report.single_candidate = j.value("single_candidate", false);
  if (j.contains("decision_matrix")) {
    const auto& matrix = j["decision_matrix"];
    const auto parse_matrix = [&](const char* key, DecisionMatrix& out) {
      if (!matrix.contains(key)) {
        return;
      }
      for (const auto& row : matrix[key]) {
        out.rows += 1;
        out.cols = row.size();
        for (const auto& value : row) {
          out.values.push_back(value.get<double>());
        }
      }
      out.kinds.assign(out.cols, CriterionKind::kBenefit);
      if (matrix.contains("columns")) {
        out.column_labels = matrix["columns"].get<std::vector<std::string>>();
      }
    };
    parse_matrix("values", report.matrix);
    parse_matrix("shifted_values", report.shifted_matrix);
    if (matrix.contains("column_shifts")) {
      report.column_shifts = matrix["column_shifts"].get<std::vector<double>>();
    }
  }
  if (j.contains("entropy_weights")) {
    report.weights.weights = j["entropy_weights"].get<std::vector<double>>();
  }
  if (j.contains("topsis")) {
    const auto& topsis = j["topsis"];
    report.topsis.closeness = topsis.value("closeness", std::vector<double>{});
    report.topsis.ranking = topsis.value("ranking", std::vector<std::size_t>{});
    report.topsis.ideal = topsis.value("ideal", std::vector<double>{});
    report.topsis.anti_ideal = topsis.value("anti_ideal", std::vector<double>{});
    report.topsis.separation_plus = topsis.value("separation_plus", std::vector<double>{});
    report.topsis.separation_minus = topsis.value("separation_minus", std::vector<double>{});
  }
  if (j.contains("tie_breaks")) {
    report.tie_breaks = j["tie_breaks"].get<std::vector<std::string>>();
  }
  report.chosen_caption = j.value("chosen_caption", std::string{});
  report.chosen_source_image_id = j.value("chosen_source_image_id", std::string{});
  return report;
}

Pipeline Pipeline::load(const PipelineConfig& config) {
  validate_config(config);
  Pipeline pipeline;
  pipeline.config_ = config;

  {
    const bool binary = config.embedding_format == "binary";
    std::ifstream in = open_or_throw(config.embeddings, binary);
    EmbeddingLoadStats stats;
    pipeline.table_ =
        load_embeddings(in, binary ? EmbeddingFormat::kBinary : EmbeddingFormat::kTsv,
                        static_cast<std::size_t>(config.embedding_dimension), &stats);
  }
  {
    std::ifstream in = open_or_throw(config.stopwords);
    pipeline.stopwords_ = load_stopwords(in);
    if (pipeline.stopwords_.empty()) {
      throw IngestError("stopword list is empty: " + config.stopwords);
    }
  }
  {
    std::ifstream in = open_or_throw(config.pos_lexicon);
    pipeline.pos_lexicon_ = load_pos_lexicon(in);
  }
  {
    std::ifstream in = open_or_throw(config.adjnoun_lexicon);
    pipeline.adjnoun_lexicon_ = load_adjnoun_lexicon(in);
  }
  {
    std::ifstream in = open_or_throw(config.image_features);
    pipeline.store_ = load_image_features(in);
  }
  {
    std::ifstream in = open_or_throw(config.caption_database);
    pipeline.captions_ = load_caption_database(in);
  }
  {
    std::ifstream in = open_or_throw(config.tag_predictions);
    pipeline.tags_ = load_tag_predictions(in);
  }
  if (!config.query_list.empty()) {
    std::ifstream in = open_or_throw(config.query_list);
    pipeline.default_queries_ = load_query_list(in);
  }

  attach_captions(pipeline.store_, pipeline.captions_);
  for (const ImageRecord& record : pipeline.store_) {
    pipeline.by_id_.emplace(record.image_id, &record);
  }
  return pipeline;
}

SelectionReport Pipeline::run_query(const std::string& image_id) const {
  SelectionReport report;
  report.query_image_id = image_id;

  const auto it = by_id_.find(image_id);
  if (it == by_id_.end()) {
    throw std::invalid_argument("query image '" + image_id + "' has no feature vector");
  }
  const ImageRecord& query = *it->second;

  // Adaptive neighborhood; the query's own record never competes with the
  // training set.
  const NeighborSet neighbors =
      retrieve_neighbors(query.feature, store_, config_.epsilon,
                         static_cast<std::size_t>(config_.max_images), image_id);
  report.excluded_self = true;
  report.closest_distance = neighbors.closest_distance;
  report.radius = neighbors.radius;
  report.normalizer_z = pipeline_normalizer(neighbors);
  const std::size_t distance_ties = count_adjacent_ties(
      neighbors.entries.begin(), neighbors.entries.end(),
      [](const Neighbor& n) { return n.distance; });
  if (distance_ties > 0) {
    report.tie_breaks.push_back("neighbor distance ties resolved by image_id at " +
                                std::to_string(distance_ties) + " boundaries");
  }
  for (const Neighbor& neighbor : neighbors.entries) {
    report.neighbors.push_back(
        {neighbor.record->image_id, neighbor.distance,
         similarity_from_distance(neighbor.distance, report.normalizer_z)});
  }

  // Reference vector: MIL when any tag qualifies, else query expansion.
  std::vector<TagPrediction> tags;
  if (const auto tag_it = tags_.find(image_id); tag_it != tags_.end()) {
    tags = tag_it->second;
  }
  DenseVector reference;
  ReferenceKind kind = ReferenceKind::kQueryExpansion;
  if (auto mil = build_mil_vector(tags, table_, config_.min_tag_probability)) {
    reference = std::move(*mil);
    kind = ReferenceKind::kMil;
    report.branch = "mil";
    for (const TagPrediction& tag : tags) {
      if (tag.probability >= config_.min_tag_probability &&
          phrase_vector(tag.word, table_).coverage > 0) {
        ++report.reference_coverage;
      }
    }
  } else {
    reference = build_q_vector(neighbors, table_, stopwords_);
    report.branch = "query_expansion";
  }

  report.query_slots = extract_query_slots(tags, pos_lexicon_, adjnoun_lexicon_);

  report.candidates =
      select_candidates(neighbors, reference, kind, table_, stopwords_,
                        static_cast<std::size_t>(config_.n_candidates));
  const std::size_t cosine_ties = count_adjacent_ties(
      report.candidates.entries.begin(), report.candidates.entries.end(),
      [](const Candidate& c) { return c.cosine_to_reference; });
  if (cosine_ties > 0) {
    report.tie_breaks.push_back(
        "candidate cosine ties resolved by (visual similarity, caption text) at " +
        std::to_string(cosine_ties) + " boundaries");
  }

  // Single retrieved caption: nothing to weigh, the decision is forced.
  if (report.candidates.entries.size() == 1) {
    report.single_candidate = true;
    report.chosen_caption = report.candidates.entries.front().caption;
    report.chosen_source_image_id = report.candidates.entries.front().source_image_id;
    return report;
  }

  report.matrix = build_decision_matrix(report.query_slots, report.candidates, table_,
                                        pos_lexicon_, MatchParams{config_.threshold_H});
  report.shifted_matrix = shift_nonnegative(report.matrix, &report.column_shifts);
  report.weights = entropy_weights(report.shifted_matrix);
  if (report.weights.degenerate_uniform) {
    report.tie_breaks.push_back("every criterion column uniform: weights fall back to 1/n");
  }
  report.topsis = topsis_rank(report.shifted_matrix, report.weights);
  if (report.topsis.degenerate_rows > 0) {
    report.tie_breaks.push_back("closeness defined as 1 for " +
                                std::to_string(report.topsis.degenerate_rows) +
                                " row(s) with zero separations");
  }
  const std::size_t closeness_ties = count_adjacent_ties(
      report.topsis.ranking.begin(), report.topsis.ranking.end(),
      [&](std::size_t row) { return report.topsis.closeness[row]; });
  if (closeness_ties > 0) {
    report.tie_breaks.push_back("ranking closeness ties kept in candidate order at " +
                                std::to_string(closeness_ties) + " boundaries");
  }

  const SelectionOutcome outcome = select_best(report.topsis, report.candidates);
  if (outcome.tie_break_used) {
    report.tie_breaks.push_back(outcome.tie_break_note);
  }
  report.chosen_caption = report.candidates.entries[outcome.index].caption;
  report.chosen_source_image_id = report.candidates.entries[outcome.index].source_image_id;
  return report;
}

std::vector<SelectionReport> Pipeline::run(const std::vector<std::string>& query_ids,
                                           int workers) const {
  if (workers < 1) {
    throw std::invalid_argument("run: workers must be >= 1");
  }
  std::vector<SelectionReport> reports(query_ids.size());
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(query_ids.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto index = static_cast<std::size_t>(i);
    try {
      reports[index] = run_query(query_ids[index]);
    } catch (const std::exception& e) {
      SelectionReport failed;
      failed.query_image_id = query_ids[index];
      failed.failed = true;
      failed.error = e.what();
      reports[index] = std::move(failed);
    }
  }
  return reports;
}

EvalReport evaluate(const std::vector<SelectionReport>& reports,
                    const std::unordered_map<std::string, std::vector<std::string>>& references) {
  if (reports.empty()) {
    throw std::invalid_argument("evaluate: empty report list");
  }
  EvalReport eval;
  std::vector<TokenList> candidates;
  std::vector<std::vector<TokenList>> reference_sets;
  for (const SelectionReport& report : reports) {
    if (report.failed) {
      ++eval.skipped;
      continue;
    }
    const auto it = references.find(report.query_image_id);
    if (it == references.end() || it->second.empty()) {
      throw std::invalid_argument("evaluate: no references for image '" +
                                  report.query_image_id + "'");
    }
    std::vector<TokenList> tokenized;
    tokenized.reserve(it->second.size());
    for (const std::string& reference : it->second) {
      tokenized.push_back(tokenize(reference));
    }
    candidates.push_back(tokenize(report.chosen_caption));
    reference_sets.push_back(std::move(tokenized));

    PerImageMetrics row;
    row.image_id = report.query_image_id;
    row.bleu_smoothed = sentence_bleu_smoothed(candidates.back(), reference_sets.back());
    row.rouge_l = rouge_l(candidates.back(), reference_sets.back());
    eval.per_image.push_back(std::move(row));
  }
  if (candidates.empty()) {
    throw std::invalid_argument("evaluate: no successful reports to evaluate");
  }
  eval.corpus_size = candidates.size();
  eval.bleu = corpus_bleu(candidates, reference_sets);
  double rouge_sum = 0.0;
  for (const PerImageMetrics& row : eval.per_image) {
    rouge_sum += row.rouge_l;
  }
  eval.rouge_l = rouge_sum / static_cast<double>(eval.per_image.size());
  return eval;
}

ordered_json eval_report_to_json(const EvalReport& report) {
  ordered_json out;
  out["bleu_1"] = report.bleu[0];
  out["bleu_2"] = report.bleu[1];
  out["bleu_3"] = report.bleu[2];
  out["bleu_4"] = report.bleu[3];
  out["rouge_l"] = report.rouge_l;
  out["corpus_size"] = report.corpus_size;
  out["skipped"] = report.skipped;
  ordered_json per_image = ordered_json::array();
  for (const PerImageMetrics& row : report.per_image) {
    ordered_json entry;
    entry["image_id"] = row.image_id;
    entry["bleu_1_smoothed"] = row.bleu_smoothed[0];
    entry["bleu_2_smoothed"] = row.bleu_smoothed[1];
    entry["bleu_3_smoothed"] = row.bleu_smoothed[2];
    entry["bleu_4_smoothed"] = row.bleu_smoothed[3];
    entry["rouge_l"] = row.rouge_l;
    per_image.push_back(std::move(entry));
  }
  out["per_image"] = std::move(per_image);
  out["smoothing_note"] = "per-image bleu uses add-epsilon smoothing; corpus bleu does not";
  return out;
}

}  // namespace capsel
