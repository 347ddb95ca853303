#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchdistill/pipeline.hpp"

namespace pd {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string id;
  std::string project;
  std::filesystem::path old_path;  // directory or .tar.gz
  std::filesystem::path new_path;
  std::filesystem::path truth;
  std::filesystem::path harness;  // empty: manifest default
  std::optional<double> budget_mins;
  std::optional<std::size_t> max_units;
};

struct Manifest {
  std::filesystem::path harness;  // empty: in-process MiniLang
  std::vector<ManifestEntry> commits;
};

// Relative paths resolve against the manifest's directory. Throws
// ManifestError on malformed input or a missing ground-truth file.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir = {});

struct CommitEval {
  std::string id;
  std::string project;
  CommitReport report;
  bool generated = false;
  bool matched = false;
  bool commit_identical = false;  // the whole commit diff equals the truth
  std::size_t n1 = 0;             // changed lines of the commit
  std::size_t n2 = 0;             // changed lines of the truth
};

struct SizeStats {
  std::size_t commits = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double ratio = 0;  // n2 / n1
};

struct RuntimeRow {
  std::string id;
  std::size_t units = 0;
  double seconds = 0;
  Outcome outcome = Outcome::Patch;
};

struct CorpusMetrics {
  std::size_t total = 0;
  std::size_t generated = 0;
  std::size_t matched = 0;
  std::size_t commit_identical = 0;
  double precision = 0;  // matched / generated, 0 when nothing was generated
  double recall = 0;     // matched / total
  double p_same = 0;
  double p_diff = 0;
  std::map<std::string, std::size_t> outcomes;
  std::map<std::string, SizeStats> projects;
  SizeStats overall;
  std::vector<RuntimeRow> runtime;
};

CorpusMetrics compute_metrics(const std::vector<CommitEval>& commits);
nlohmann::ordered_json to_json(const CorpusMetrics& m);
// One row per commit.
std::string metrics_csv(const std::vector<CommitEval>& commits);

// units, seconds, outcome per report; a timeout is charged the full budget.
std::vector<RuntimeRow> report_runtime(const std::vector<CommitReport>& reports);
std::string runtime_csv(const std::vector<RuntimeRow>& rows);
std::string runtime_svg(const std::vector<RuntimeRow>& rows);
// Median seconds per unit-count bucket; buckets are [2^k, 2^(k+1)).
std::map<std::size_t, double> median_by_size(const std::vector<RuntimeRow>& rows);

// Runs extract on one commit and compares against `truth`. Outputs go to
// `out` unless it is empty.
CommitEval evaluate_commit(const std::string& id, const std::string& project, const SourceTree& old_version,
                           const SourceTree& new_version, const std::string& truth, const Harness& harness,
                           const ExtractOptions& options, const std::filesystem::path& out = {});

struct EvalOptions {
  ExtractOptions extract;
  unsigned commit_jobs = 1;
  std::filesystem::path out;  // empty: nothing written
  bool plot = false;          // runtime.svg next to runtime.csv
};

struct EvalResult {
  std::vector<CommitEval> commits;  // manifest order
  CorpusMetrics metrics;
};

// Per-commit outputs go to out/commits/<id>/; metrics.csv, metrics.json and
// runtime.csv to out/.
EvalResult run_eval(const Manifest& manifest, const EvalOptions& options);

}  // namespace pd
