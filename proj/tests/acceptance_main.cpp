// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Criteria 6 and 7 drive the CLI binary against the committed fixture.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "capsel/eval_metrics.hpp"
#include "capsel/mcdm.hpp"
#include "capsel/pipeline.hpp"
#include "capsel/semantic_matching.hpp"
#include "capsel/visual_retrieval.hpp"
#include "oracles.hpp"

#ifndef CAPSEL_CLI_PATH
#error "CAPSEL_CLI_PATH must point at the built CLI binary"
#endif
#ifndef CAPSEL_FIXTURE_DIR
#error "CAPSEL_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

using namespace capsel;

struct CheckContext {
  std::size_t failures = 0;
  std::ostringstream detail;

  void require(bool condition, const std::string& message) {
    if (!condition) {
      ++failures;
      if (failures <= 5) {
        detail << "      " << message << '\n';
      }
    }
  }
};

bool run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void(CheckContext&)>& body) {
  CheckContext ctx;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(ctx);
  } catch (const std::exception& e) {
    ctx.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.require(elapsed < budget_seconds,
              "runtime " + std::to_string(elapsed) + "s exceeds budget " +
                  std::to_string(budget_seconds) + "s");
  const bool passed = ctx.failures == 0;
  std::cout << (passed ? "[pass]" : "[FAIL]") << " criterion " << number << ": " << name
            << "  (" << elapsed << "s)\n";
  if (!passed) {
    std::cout << ctx.detail.str();
    if (ctx.failures > 5) {
      std::cout << "      ... " << ctx.failures << " failed checks total\n";
    }
  }
  return passed;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return {};
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string command = std::string(CAPSEL_CLI_PATH) + " " + args;
  return std::system(command.c_str());
}

// ---------------------------------------------------------------- criterion 1

void criterion_match_oracle(CheckContext& ctx) {
  std::mt19937 rng(160900);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  EmbeddingTable table(4);
  std::vector<std::string> vocabulary;
  for (int i = 0; i < 14; ++i) {
    vocabulary.push_back("tok" + std::to_string(i));
    table.insert(vocabulary.back(), {value(rng), value(rng), value(rng), value(rng)});
  }
  const MatchParams params{0.85};
  std::uniform_int_distribution<std::size_t> count(0, 6);
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> query_items(count(rng));
    std::vector<std::string> caption_items(count(rng));
    for (auto& item : query_items) {
      item = vocabulary[pick(rng)];
    }
    for (auto& item : caption_items) {
      item = vocabulary[pick(rng)];
    }
    std::vector<std::vector<double>> query_vectors;
    std::vector<std::vector<double>> caption_vectors;
    for (const auto& item : query_items) {
      query_vectors.push_back(*table.find(item));
    }
    for (const auto& item : caption_items) {
      caption_vectors.push_back(*table.find(item));
    }
    const double actual = slot_match_score(query_items, caption_items, table, params);
    const double expected = oracle::match_score(query_vectors, caption_vectors, 0.85, false);
    ctx.require(std::abs(actual - expected) <= 1e-12,
                "trial " + std::to_string(trial) + ": " + std::to_string(actual) + " vs " +
                    std::to_string(expected));
  }

  // hand-derived anchors
  EmbeddingTable axes(3);
  axes.insert("e1", {1, 0, 0});
  axes.insert("e2", {0, 1, 0});
  axes.insert("e3", {0, 0, 1});
  const std::vector<std::string> pair_q{"e1", "e2"};
  const std::vector<std::string> pair_b{"e2", "e1"};
  ctx.require(std::abs(slot_match_score(pair_q, pair_b, axes, params) - 1.0) <= 1e-12,
              "perfect-match anchor");
  const std::vector<std::string> miss_b{"e3", "e3"};
  ctx.require(std::abs(slot_match_score(pair_q, miss_b, axes, params) - (-1.0)) <= 1e-12,
              "all-missed anchor");
  const std::vector<std::string> three_q{"e1", "e2", "e3"};
  const std::vector<std::string> one_b{"e1"};
  ctx.require(std::abs(slot_match_score(three_q, one_b, axes, params) - 0.0) <= 1e-12,
              "query-surplus anchor");
}

// ---------------------------------------------------------------- criterion 2

void criterion_entropy(CheckContext& ctx) {
  std::mt19937 rng(20250810);
  std::uniform_int_distribution<std::size_t> rows(2, 10);
  std::uniform_int_distribution<std::size_t> cols(1, 5);
  std::uniform_real_distribution<double> value(0.0, 10.0);

  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = rows(rng);
    const std::size_t n = cols(rng);
    std::vector<std::vector<double>> data(m, std::vector<double>(n));
    for (auto& row : data) {
      for (auto& x : row) {
        x = value(rng);
      }
    }
    if (trial % 3 == 0) {
      // plant a uniform column
      const double c = value(rng) + 0.1;
      for (auto& row : data) {
        row[0] = c;
      }
    }
    DecisionMatrix matrix;
    matrix.rows = m;
    matrix.cols = n;
    matrix.kinds.assign(n, CriterionKind::kBenefit);
    for (const auto& row : data) {
      matrix.values.insert(matrix.values.end(), row.begin(), row.end());
    }
    const WeightVector weights = entropy_weights(matrix);
    const std::vector<double> expected = oracle::entropy_weights(data);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += weights.weights[j];
      ctx.require(weights.weights[j] >= 0.0, "negative weight");
      ctx.require(std::abs(weights.weights[j] - expected[j]) <= 1e-12, "oracle mismatch");
    }
    ctx.require(std::abs(sum - 1.0) <= 1e-9, "weights do not sum to 1");
    if (trial % 3 == 0 && n > 1) {
      ctx.require(weights.weights[0] == 0.0, "uniform column kept nonzero weight");
    }
  }

  // all-uniform fallback
  DecisionMatrix uniform;
  uniform.rows = 3;
  uniform.cols = 2;
  uniform.kinds.assign(2, CriterionKind::kBenefit);
  uniform.values = {1, 2, 1, 2, 1, 2};
  const WeightVector fallback = entropy_weights(uniform);
  ctx.require(std::abs(fallback.weights[0] - 0.5) <= 1e-12 &&
                  std::abs(fallback.weights[1] - 0.5) <= 1e-12,
              "uniform fallback");
}

// ---------------------------------------------------------------- criterion 3

void criterion_topsis(CheckContext& ctx) {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<std::size_t> rows(2, 10);
  std::uniform_int_distribution<std::size_t> cols(1, 5);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);

  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = rows(rng);
    const std::size_t n = cols(rng);
    std::vector<std::vector<double>> data(m, std::vector<double>(n));
    for (auto& row : data) {
      for (auto& x : row) {
        x = value(rng);
      }
    }
    std::vector<double> weights(n);
    double weight_sum = 0.0;
    for (auto& w : weights) {
      w = value(rng) + 0.01;
      weight_sum += w;
    }
    for (auto& w : weights) {
      w /= weight_sum;
    }

    DecisionMatrix matrix;
    matrix.rows = m;
    matrix.cols = n;
    matrix.kinds.assign(n, CriterionKind::kBenefit);
    for (const auto& row : data) {
      matrix.values.insert(matrix.values.end(), row.begin(), row.end());
    }
    const TopsisResult result = topsis_rank(matrix, WeightVector{weights});
    const auto expected = oracle::topsis(data, weights, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < m; ++i) {
      ctx.require(result.closeness[i] >= 0.0 && result.closeness[i] <= 1.0,
                  "closeness out of [0,1]");
      ctx.require(std::abs(result.closeness[i] - expected.closeness[i]) <= 1e-12,
                  "oracle closeness mismatch");
    }
    ctx.require(result.ranking == expected.ranking, "oracle ranking mismatch");

    // strict dominance: lift row 0 above every column maximum
    auto dominant = data;
    for (std::size_t j = 0; j < n; ++j) {
      double best = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        best = std::max(best, dominant[i][j]);
      }
      dominant[0][j] = best + 1.0;
    }
    DecisionMatrix dominant_matrix = matrix;
    dominant_matrix.values.clear();
    for (const auto& row : dominant) {
      dominant_matrix.values.insert(dominant_matrix.values.end(), row.begin(), row.end());
    }
    const TopsisResult dominant_result = topsis_rank(dominant_matrix, WeightVector{weights});
    ctx.require(dominant_result.ranking.front() == 0, "dominant row not ranked first");

    // column scaling invariance
    auto scaled = data;
    const std::size_t column = trial % n;
    const double k = scale(rng);
    for (auto& row : scaled) {
      row[column] *= k;
    }
    DecisionMatrix scaled_matrix = matrix;
    scaled_matrix.values.clear();
    for (const auto& row : scaled) {
      scaled_matrix.values.insert(scaled_matrix.values.end(), row.begin(), row.end());
    }
    const TopsisResult scaled_result = topsis_rank(scaled_matrix, WeightVector{weights});
    for (std::size_t i = 0; i < m; ++i) {
      ctx.require(std::abs(scaled_result.closeness[i] - result.closeness[i]) <= 1e-9,
                  "column scaling moved closeness");
    }
    ctx.require(scaled_result.ranking == result.ranking, "column scaling changed ranking");
  }
}

// ---------------------------------------------------------------- criterion 4

void criterion_retrieval(CheckContext& ctx) {
  std::mt19937 rng(98765);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> eps(0.0, 1.5);

  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ImageRecord> store;
    store.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
      store.push_back({"img" + std::to_string(i), {coord(rng), coord(rng), coord(rng)}, {}});
    }
    const DenseVector query{coord(rng), coord(rng), coord(rng)};
    const double epsilon = eps(rng);

    std::vector<oracle::NeighborRow> rows;
    rows.reserve(store.size());
    for (const ImageRecord& record : store) {
      rows.push_back({record.image_id, euclidean_distance(query, record.feature)});
    }
    const auto expected = oracle::adaptive_neighborhood(rows, epsilon, 100);
    const auto actual = retrieve_neighbors(query, store, epsilon, 100);
    ctx.require(actual.entries.size() == expected.size(), "neighborhood size mismatch");
    for (std::size_t i = 0; i < std::min(actual.entries.size(), expected.size()); ++i) {
      ctx.require(actual.entries[i].record->image_id == expected[i].image_id,
                  "neighborhood order mismatch");
      ctx.require(actual.entries[i].distance == expected[i].distance,
                  "neighborhood distance mismatch");
    }
  }

  // epsilon monotonicity
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ImageRecord> store;
    for (int i = 0; i < 60; ++i) {
      store.push_back({"img" + std::to_string(i), {coord(rng), coord(rng)}, {}});
    }
    const DenseVector query{coord(rng), coord(rng)};
    double e1 = eps(rng);
    double e2 = eps(rng);
    if (e1 > e2) {
      std::swap(e1, e2);
    }
    const auto small = retrieve_neighbors(query, store, e1, store.size());
    const auto large = retrieve_neighbors(query, store, e2, store.size());
    for (const Neighbor& n : small.entries) {
      const bool present =
          std::any_of(large.entries.begin(), large.entries.end(),
                      [&n](const Neighbor& m) { return m.record == n.record; });
      ctx.require(present, "entry lost when epsilon grew");
    }
  }
}

// ---------------------------------------------------------------- criterion 5

void criterion_metrics(CheckContext& ctx) {
  const TokenList caption{"a", "cat", "on", "a", "mat"};
  const auto self_match = corpus_bleu({caption}, {{caption}});
  for (const double b : self_match) {
    ctx.require(b == 1.0, "BLEU self-match not exactly 1");
  }

  const auto the_cat =
      corpus_bleu({TokenList{"the", "cat"}}, {{TokenList{"the", "cat", "sat"}}});
  ctx.require(std::abs(the_cat[0] - std::exp(-0.5)) <= 1e-9, "brevity-penalty anchor");

  const double rouge =
      rouge_l(TokenList{"a", "b", "c"}, {TokenList{"a", "x", "c"}}, 1.2);
  ctx.require(std::abs(rouge - 2.0 / 3.0) <= 1e-9, "rouge F anchor");

  std::mt19937 rng(1357);
  std::uniform_int_distribution<int> length(0, 30);
  std::uniform_int_distribution<int> letter(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    TokenList a(static_cast<std::size_t>(length(rng)));
    TokenList b(static_cast<std::size_t>(length(rng)));
    for (auto& t : a) {
      t = std::string(1, static_cast<char>('a' + letter(rng)));
    }
    for (auto& t : b) {
      t = std::string(1, static_cast<char>('a' + letter(rng)));
    }
    ctx.require(lcs_length(a, b) == oracle::lcs(a, b), "LCS oracle mismatch");
  }
}

// ---------------------------------------------------------------- criterion 6

struct FixtureExpectation {
  std::string image_id;
  std::string branch;
  std::string chosen;
  std::string source;
};

// Winners derived by hand-executing the pipeline over the fixture once.
const std::vector<FixtureExpectation> kExpectations{
    {"img01", "mil", "a man in a blue jacket on snow", "img02"},
    {"img05", "mil", "a small cat sit on a tree", "img06"},
    {"img08", "query_expansion", "a woman with a small racquet", "img09"},
};

void criterion_golden_fixture(CheckContext& ctx) {
  namespace fs = std::filesystem;
  const fs::path fixture = fs::path(CAPSEL_FIXTURE_DIR) / "pipeline10";
  const fs::path scratch =
      fs::temp_directory_path() / ("capsel_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);
  const fs::path out = scratch / "reports.jsonl";

  const int rc = run_cli("run --config " + (fixture / "config.json").string() + " --out " +
                         out.string() + " 2>/dev/null");
  ctx.require(rc == 0, "CLI run exited with " + std::to_string(rc));

  const std::string produced = read_file(out);
  const std::string golden = read_file(fixture / "golden_reports.jsonl");
  ctx.require(!produced.empty(), "no reports produced");
  ctx.require(!golden.empty(), "golden file missing");
  ctx.require(produced == golden, "reports differ from the golden file");

  // parse the produced reports and verify the hand-derived outcomes
  std::istringstream lines(produced);
  std::string line;
  std::size_t index = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) {
      continue;
    }
    const auto parsed = nlohmann::json::parse(line);
    const SelectionReport report = report_from_json(parsed);
    ctx.require(index < kExpectations.size(), "more reports than expected");
    if (index < kExpectations.size()) {
      const FixtureExpectation& expected = kExpectations[index];
      ctx.require(report.query_image_id == expected.image_id, "report order");
      ctx.require(report.branch == expected.branch,
                  report.query_image_id + ": branch " + report.branch);
      ctx.require(report.chosen_caption == expected.chosen,
                  report.query_image_id + ": chose '" + report.chosen_caption + "'");
      ctx.require(report.chosen_source_image_id == expected.source,
                  report.query_image_id + ": source " + report.chosen_source_image_id);
    }

    if (report.query_image_id == "img01") {
      // the near-threshold attribute case: the winning caption's attribute
      // criterion is accepted at ~0.88, at or above H = 0.85
      std::size_t winner_row = report.candidates.entries.size();
      for (std::size_t i = 0; i < report.candidates.entries.size(); ++i) {
        if (report.candidates.entries[i].caption == report.chosen_caption) {
          winner_row = i;
          break;
        }
      }
      ctx.require(winner_row < report.matrix.rows, "winner row not found");
      if (winner_row < report.matrix.rows) {
        const double attribute_score = report.matrix.at(winner_row, 1);
        ctx.require(attribute_score >= 0.85, "attribute match fell below the threshold");
        ctx.require(std::abs(attribute_score - 0.88) <= 1e-3,
                    "attribute match not at the near-threshold value: " +
                        std::to_string(attribute_score));
      }
      // action column carries no evidence for this query
      ctx.require(!report.weights.weights.empty() && report.weights.weights[2] == 0.0,
                  "all-zero action column should get zero weight");
    }
    if (report.query_image_id == "img08") {
      // degenerate cascade: empty slots, uniform weights, all-ones closeness
      for (const double w : report.weights.weights) {
        ctx.require(std::abs(w - 1.0 / 3.0) <= 1e-12, "expected uniform weights");
      }
      for (const double cl : report.topsis.closeness) {
        ctx.require(cl == 1.0, "expected degenerate closeness 1");
      }
      ctx.require(!report.tie_breaks.empty(), "tie-break log missing");
    }

    // replayability: stored shifted matrix + weights reproduce closeness
    if (!report.single_candidate && report.shifted_matrix.rows >= 2) {
      const TopsisResult replay = topsis_rank(report.shifted_matrix, report.weights);
      for (std::size_t i = 0; i < replay.closeness.size(); ++i) {
        ctx.require(std::abs(replay.closeness[i] - report.topsis.closeness[i]) <= 1e-9,
                    "replayed closeness drifted");
      }
    }
    ++index;
  }
  ctx.require(index == kExpectations.size(), "report count mismatch");

  fs::remove_all(scratch);
}

// ---------------------------------------------------------------- criterion 7

void criterion_determinism(CheckContext& ctx) {
  namespace fs = std::filesystem;
  const fs::path fixture = fs::path(CAPSEL_FIXTURE_DIR) / "pipeline10";
  const fs::path scratch =
      fs::temp_directory_path() / ("capsel_determinism_" + std::to_string(::getpid()));
  fs::create_directories(scratch);
  const fs::path out1 = scratch / "reports_w1.jsonl";
  const fs::path out8 = scratch / "reports_w8.jsonl";

  const std::string config = (fixture / "config.json").string();
  const int rc1 =
      run_cli("run --config " + config + " --out " + out1.string() + " --workers 1 2>/dev/null");
  const int rc8 =
      run_cli("run --config " + config + " --out " + out8.string() + " --workers 8 2>/dev/null");
  ctx.require(rc1 == 0 && rc8 == 0, "CLI runs failed");

  const std::string a = read_file(out1);
  const std::string b = read_file(out8);
  ctx.require(!a.empty(), "no output from workers=1");
  ctx.require(a == b, "workers=1 and workers=8 outputs differ");

  fs::remove_all(scratch);
}

}  // namespace

int main() {
  int failures = 0;
  failures += !run_criterion(1, "slot-matching oracle suite", 1.0, criterion_match_oracle);
  failures += !run_criterion(2, "entropy weighting suite", 1.0, criterion_entropy);
  failures += !run_criterion(3, "TOPSIS suite", 5.0, criterion_topsis);
  failures += !run_criterion(4, "adaptive retrieval suite", 5.0, criterion_retrieval);
  failures += !run_criterion(5, "metric anchors", 2.0, criterion_metrics);
  failures += !run_criterion(6, "end-to-end golden fixture", 2.0, criterion_golden_fixture);
  failures += !run_criterion(7, "worker-count determinism", 5.0, criterion_determinism);

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
