#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "erag/errors.hpp"
#include "erag/harness.hpp"

namespace erag {

SummaryStat mean_std(const std::vector<double>& values) {
  SummaryStat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string format_stat(const SummaryStat& stat, int decimals) {
  if (stat.n == 0) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", decimals, stat.mean, decimals, stat.stddev);
  return buf;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    ++n;
  }
};

struct RepetitionTotals {
  Accumulator success, easy, hard, latency, tokens, full_graph;
};

// Per-repetition means become the samples for the cross-repetition stats.
SummaryStat across(const std::map<int, RepetitionTotals>& reps, Accumulator RepetitionTotals::*field) {
  std::vector<double> samples;
  for (const auto& [rep, totals] : reps) {
    const Accumulator& a = totals.*field;
    if (a.n > 0) samples.push_back(a.sum / static_cast<double>(a.n));
  }
  return mean_std(samples);
}

}  // namespace

SuiteSummary summarize(const std::vector<EpisodeResult>& results) {
  using Key = std::tuple<std::string, std::size_t>;
  std::map<Key, std::map<int, RepetitionTotals>> groups;
  std::map<Key, SummaryRow> rows;

  for (const auto& r : results) {
    const Key key{r.variant, r.distractors};
    SummaryRow& row = rows[key];
    row.variant = r.variant;
    row.distractors = r.distractors;
    ++row.episodes;
    RepetitionTotals& t = groups[key][r.repetition];
    const double s = r.success ? 1.0 : 0.0;
    t.success.add(s);
    (r.difficulty == "hard" ? t.hard : t.easy).add(s);
    if (r.failure_mode == failure::kTokenLimit) {
      ++row.token_limited;
      continue;
    }
    ++row.completed;
    t.latency.add(r.avg_step_latency_s);
    t.tokens.add(static_cast<double>(r.cumulative_observation_tokens));
    t.full_graph.add(static_cast<double>(r.full_graph_requests));
  }

  SuiteSummary summary;
  for (auto& [key, row] : rows) {
    const auto& reps = groups[key];
    row.success = across(reps, &RepetitionTotals::success);
    row.easy_success = across(reps, &RepetitionTotals::easy);
    row.hard_success = across(reps, &RepetitionTotals::hard);
    row.step_latency_s = across(reps, &RepetitionTotals::latency);
    row.cumulative_tokens = across(reps, &RepetitionTotals::tokens);
    row.full_graph_requests = across(reps, &RepetitionTotals::full_graph);
    summary.rows.push_back(row);
  }
  return summary;
}

SuiteSummary summarize_files(const std::vector<std::string>& paths) {
  std::vector<EpisodeResult> results;
  std::size_t warnings = 0;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open results file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        results.push_back(EpisodeResult::from_json(nlohmann::json::parse(line)));
      } catch (const std::exception&) {
        ++warnings;
      }
    }
  }
  SuiteSummary summary = summarize(results);
  summary.warnings = warnings;
  return summary;
}

std::string SuiteSummary::render() const {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-14s %11s %8s %17s %17s %17s %17s %21s %17s %11s\n", "variant",
                "distractors", "episodes", "success", "easy success", "hard success",
                "step time (s)", "cum. tokens", "full-graph req.", "token-limit");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-14s %11zu %8zu %17s %17s %17s %17s %21s %17s %11zu\n",
                  r.variant.c_str(), r.distractors, r.episodes, format_stat(r.success).c_str(),
                  format_stat(r.easy_success).c_str(), format_stat(r.hard_success).c_str(),
                  format_stat(r.step_latency_s).c_str(), format_stat(r.cumulative_tokens, 1).c_str(),
                  format_stat(r.full_graph_requests).c_str(), r.token_limited);
    out += buf;
  }
  if (warnings > 0) out += "warnings: " + std::to_string(warnings) + " corrupt record(s) skipped\n";
  return out;
}

}  // namespace erag
