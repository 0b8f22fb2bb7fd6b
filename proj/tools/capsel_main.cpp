#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "capsel/pipeline.hpp"

namespace {

using capsel::EvalReport;
using capsel::Pipeline;
using capsel::PipelineConfig;
using capsel::SelectionReport;

constexpr int kExitOk = 0;
constexpr int kExitStartupError = 1;
constexpr int kExitPartialFailure = 2;

int run_command(const std::string& config_path, const std::string& queries_path,
                const std::string& out_path, int workers_override) {
  PipelineConfig config;
  std::vector<std::string> queries;
  Pipeline pipeline = [&] {
    config = capsel::load_config_file(config_path);
    return Pipeline::load(config);
  }();

  if (!queries_path.empty()) {
    std::ifstream in(queries_path);
    if (!in) {
      throw capsel::IngestError("cannot open query list: " + queries_path);
    }
    queries = capsel::load_query_list(in);
  } else {
    queries = pipeline.default_queries();
  }
  if (queries.empty()) {
    throw std::invalid_argument("no query ids given (config query_list or --queries)");
  }

  const int workers = workers_override > 0 ? workers_override : pipeline.config().workers;
  const std::vector<SelectionReport> reports = pipeline.run(queries, workers);

  std::ofstream out(out_path);
  if (!out) {
    throw capsel::IngestError("cannot open output file: " + out_path);
  }
  std::size_t failures = 0;
  for (const SelectionReport& report : reports) {
    out << capsel::report_to_json(report).dump() << '\n';
    if (report.failed) {
      ++failures;
      std::cerr << "query " << report.query_image_id << " failed: " << report.error << '\n';
    }
  }
  out.close();
  std::cerr << "wrote " << reports.size() << " reports to " << out_path;
  if (failures > 0) {
    std::cerr << " (" << failures << " failed)";
  }
  std::cerr << '\n';
  return failures > 0 ? kExitPartialFailure : kExitOk;
}

std::vector<SelectionReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw capsel::IngestError("cannot open reports file: " + path);
  }
  std::vector<SelectionReport> reports;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    const auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw capsel::IngestError("reports: malformed JSON on line " +
                                std::to_string(line_number));
    }
    reports.push_back(capsel::report_from_json(parsed));
  }
  return reports;
}

int eval_command(const std::string& reports_path, const std::string& captions_path) {
  const std::vector<SelectionReport> reports = read_reports(reports_path);
  std::ifstream captions_in(captions_path);
  if (!captions_in) {
    throw capsel::IngestError("cannot open captions file: " + captions_path);
  }
  const auto references = capsel::load_caption_database(captions_in);
  const EvalReport eval = capsel::evaluate(reports, references);
  std::cout << capsel::eval_report_to_json(eval).dump(2) << '\n';
  return kExitOk;
}

void print_matrix(const capsel::DecisionMatrix& matrix, const char* title) {
  std::cout << "  " << title << ":\n";
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    std::cout << "    [";
    for (std::size_t j = 0; j < matrix.cols; ++j) {
      std::cout << (j == 0 ? "" : ", ") << matrix.at(i, j);
    }
    std::cout << "]\n";
  }
}

int inspect_command(const std::string& report_path, const std::string& image_id) {
  for (const SelectionReport& report : read_reports(report_path)) {
    if (report.query_image_id != image_id) {
      continue;
    }
    std::cout << "query image: " << report.query_image_id << '\n';
    if (report.failed) {
      std::cout << "FAILED: " << report.error << '\n';
      return kExitOk;
    }
    std::cout << "branch: " << report.branch << '\n';
    std::cout << "neighborhood: " << report.neighbors.size()
              << " images, closest distance " << report.closest_distance << ", radius "
              << report.radius << '\n';
    for (const capsel::NeighborSummary& neighbor : report.neighbors) {
      std::cout << "  " << neighbor.image_id << "  distance " << neighbor.distance
                << "  similarity " << neighbor.similarity << '\n';
    }
    std::cout << "candidates (" << report.candidates.entries.size() << "):\n";
    for (const capsel::Candidate& candidate : report.candidates.entries) {
      std::cout << "  cos " << candidate.cosine_to_reference << "  sim "
                << candidate.source_visual_similarity << "  [" << candidate.source_image_id
                << "]  " << candidate.caption << '\n';
    }
    if (!report.single_candidate) {
      print_matrix(report.matrix, "decision matrix");
      print_matrix(report.shifted_matrix, "shifted matrix");
      std::cout << "  entropy weights: [";
      for (std::size_t j = 0; j < report.weights.weights.size(); ++j) {
        std::cout << (j == 0 ? "" : ", ") << report.weights.weights[j];
      }
      std::cout << "]\n  closeness:\n";
      for (std::size_t rank = 0; rank < report.topsis.ranking.size(); ++rank) {
        const std::size_t row = report.topsis.ranking[rank];
        std::cout << "    #" << rank + 1 << "  cl " << report.topsis.closeness[row] << "  "
                  << report.candidates.entries[row].caption << '\n';
      }
    } else {
      std::cout << "single candidate, decision forced\n";
    }
    for (const std::string& note : report.tie_breaks) {
      std::cout << "tie-break: " << note << '\n';
    }
    std::cout << "chosen: " << report.chosen_caption << "  (from "
              << report.chosen_source_image_id << ")\n";
    return kExitOk;
  }
  std::cerr << "no report for image id '" << image_id << "'\n";
  return kExitStartupError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieval-based image caption selection"};
  app.require_subcommand(1);

  std::string config_path;
  std::string queries_path;
  std::string out_path;
  int workers = 0;
  CLI::App* run = app.add_subcommand("run", "run the selection pipeline over query images");
  run->add_option("--config", config_path, "pipeline config JSON")->required();
  run->add_option("--queries", queries_path, "query id list (overrides config query_list)");
  run->add_option("--out", out_path, "output reports file (JSON Lines)")->required();
  run->add_option("--workers", workers, "parallel query workers (overrides config)");

  std::string reports_path;
  std::string captions_path;
  CLI::App* eval = app.add_subcommand("eval", "score chosen captions against references");
  eval->add_option("--reports", reports_path, "reports file from `run`")->required();
  eval->add_option("--captions", captions_path, "caption database (JSON Lines)")->required();

  std::string inspect_path;
  std::string image_id;
  CLI::App* inspect = app.add_subcommand("inspect", "pretty-print one decision");
  inspect->add_option("--report", inspect_path, "reports file from `run`")->required();
  inspect->add_option("--image-id", image_id, "query image id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_path, queries_path, out_path, workers);
    }
    if (eval->parsed()) {
      return eval_command(reports_path, captions_path);
    }
    if (inspect->parsed()) {
      return inspect_command(inspect_path, image_id);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStartupError;
  }
  return kExitStartupError;
}
