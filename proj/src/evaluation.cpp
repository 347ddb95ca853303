#include "patchdistill/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace pd {

namespace fs = std::filesystem;

namespace {

double ratio(std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

nlohmann::ordered_json size_json(const SizeStats& s) {
  return {{"commits", s.commits}, {"n1", s.n1}, {"n2", s.n2}, {"ratio", s.ratio}};
}

std::size_t bucket_of(std::size_t units) {
  std::size_t b = 1;
  while (b * 2 <= units) b *= 2;
  return units == 0 ? 0 : b;
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  auto resolve = [&](const std::string& p) -> fs::path {
    const fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  if (!j.is_object() || !j.contains("commits") || !j.at("commits").is_array()) {
    throw ManifestError("manifest needs a \"commits\" array");
  }
  Manifest m;
  if (j.contains("harness")) m.harness = resolve(j.at("harness").get<std::string>());
  std::set<std::string> ids;
  try {
    for (const auto& c : j.at("commits")) {
      ManifestEntry e;
      e.id = c.at("id").get<std::string>();
      if (!ids.insert(e.id).second) throw ManifestError("duplicate commit id " + e.id);
      e.project = c.value("project", "default");
      e.old_path = resolve(c.at("old").get<std::string>());
      e.new_path = resolve(c.at("new").get<std::string>());
      if (!c.contains("truth")) throw ManifestError("commit " + e.id + " has no ground-truth patch");
      e.truth = resolve(c.at("truth").get<std::string>());
      if (c.contains("harness")) e.harness = resolve(c.at("harness").get<std::string>());
      if (c.contains("budget_mins")) e.budget_mins = c.at("budget_mins").get<double>();
      if (c.contains("max_units")) e.max_units = c.at("max_units").get<std::size_t>();
      m.commits.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed manifest entry: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ManifestError("manifest not found: " + path.string());
  Manifest m = parse_manifest(read_file(path), path.parent_path());
  for (const auto& e : m.commits) {
    if (!fs::is_regular_file(e.truth)) throw ManifestError("missing ground truth for " + e.id + ": " + e.truth.string());
    for (const auto& p : {e.old_path, e.new_path}) {
      if (!fs::exists(p)) throw ManifestError("missing version for " + e.id + ": " + p.string());
    }
  }
  return m;
}

CommitEval evaluate_commit(const std::string& id, const std::string& project, const SourceTree& old_version,
                           const SourceTree& new_version, const std::string& truth, const Harness& harness,
                           const ExtractOptions& options, const fs::path& out) {
  CommitEval ce;
  ce.id = id;
  ce.project = project;
  ExtractOptions o = options;
  o.commit_id = id;
  ExtractResult r = extract(old_version, new_version, harness, o);
  const std::string want = normalize_patch_text(truth);
  const std::string whole =
      to_unified_diff(normalize(old_version).program_files(), normalize(new_version).program_files());
  ce.generated = r.patch.has_value();
  ce.matched = ce.generated && normalize_patch_text(r.patch->diff) == want;
  ce.commit_identical = normalize_patch_text(whole) == want;
  ce.n1 = changed_lines(whole);
  ce.n2 = changed_lines(truth);
  if (!out.empty()) write_outputs(r, out);
  ce.report = std::move(r.report);
  return ce;
}

CorpusMetrics compute_metrics(const std::vector<CommitEval>& commits) {
  CorpusMetrics m;
  m.total = commits.size();
  std::vector<CommitReport> reports;
  for (const auto& c : commits) {
    m.generated += c.generated;
    m.matched += c.matched;
    m.commit_identical += c.commit_identical;
    ++m.outcomes[to_string(c.report.outcome)];
    SizeStats& p = m.projects[c.project];
    ++p.commits;
    p.n1 += c.n1;
    p.n2 += c.n2;
    ++m.overall.commits;
    m.overall.n1 += c.n1;
    m.overall.n2 += c.n2;
    reports.push_back(c.report);
  }
  for (auto& [_, p] : m.projects) p.ratio = ratio(p.n2, p.n1);
  m.overall.ratio = ratio(m.overall.n2, m.overall.n1);
  m.precision = ratio(m.matched, m.generated);
  m.recall = ratio(m.matched, m.total);
  m.p_same = ratio(m.commit_identical, m.total);
  m.p_diff = m.total == 0 ? 0.0 : 1.0 - m.p_same;
  if (!reports.empty()) m.runtime = report_runtime(reports);
  return m;
}

nlohmann::ordered_json to_json(const CorpusMetrics& m) {
  nlohmann::ordered_json j;
  j["total"] = m.total;
  j["generated"] = m.generated;
  j["matched"] = m.matched;
  j["commit_identical"] = m.commit_identical;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["p_same"] = m.p_same;
  j["p_diff"] = m.p_diff;
  j["outcomes"] = m.outcomes;
  nlohmann::ordered_json projects = nlohmann::ordered_json::object();
  for (const auto& [name, p] : m.projects) projects[name] = size_json(p);
  j["projects"] = projects;
  j["overall"] = size_json(m.overall);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : m.runtime) {
    rows.push_back({{"id", r.id}, {"units", r.units}, {"seconds", r.seconds}, {"outcome", to_string(r.outcome)}});
  }
  j["runtime"] = rows;
  return j;
}

std::string metrics_csv(const std::vector<CommitEval>& commits) {
  std::string out = "id,project,outcome,units,seconds,generated,matched,commit_identical,n1,n2\n";
  for (const auto& c : commits) {
    out += csv_field(c.id) + "," + csv_field(c.project) + "," + to_string(c.report.outcome) + "," +
           std::to_string(c.report.units) + "," + fixed(c.report.times.total) + "," + std::to_string(c.generated) +
           "," + std::to_string(c.matched) + "," + std::to_string(c.commit_identical) + "," + std::to_string(c.n1) +
           "," + std::to_string(c.n2) + "\n";
  }
  return out;
}

std::vector<RuntimeRow> report_runtime(const std::vector<CommitReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("report_runtime needs at least one report");
  std::vector<RuntimeRow> rows;
  for (const auto& r : reports) {
    const double secs = r.outcome == Outcome::Timeout ? r.budget_secs : r.times.total;
    rows.push_back({r.id, r.units, secs, r.outcome});
  }
  return rows;
}

std::string runtime_csv(const std::vector<RuntimeRow>& rows) {
  std::string out = "id,units,seconds,outcome\n";
  for (const auto& r : rows) {
    out += csv_field(r.id) + "," + std::to_string(r.units) + "," + fixed(r.seconds) + "," + to_string(r.outcome) + "\n";
  }
  return out;
}

std::map<std::size_t, double> median_by_size(const std::vector<RuntimeRow>& rows) {
  std::map<std::size_t, std::vector<double>> buckets;
  for (const auto& r : rows) buckets[bucket_of(r.units)].push_back(r.seconds);
  std::map<std::size_t, double> out;
  for (auto& [b, v] : buckets) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    out[b] = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  }
  return out;
}

std::string runtime_svg(const std::vector<RuntimeRow>& rows) {
  const double w = 640, h = 400, pad = 50;
  std::size_t max_units = 1;
  double max_secs = 1e-3;
  for (const auto& r : rows) {
    max_units = std::max(max_units, r.units);
    max_secs = std::max(max_secs, r.seconds);
  }
  auto x = [&](double u) { return pad + (w - 2 * pad) * u / static_cast<double>(max_units); };
  auto y = [&](double s) { return h - pad - (h - 2 * pad) * s / max_secs; };
  auto colour = [](Outcome o) {
    switch (o) {
      case Outcome::Patch:
        return "#2a7";
      case Outcome::Timeout:
        return "#d33";
      case Outcome::TooLarge:
        return "#888";
      default:
        return "#36c";
    }
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">change units (max " << max_units
     << ")</text>\n";
  os << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2
     << ")\" text-anchor=\"middle\">seconds (max " << fixed(max_secs, 3) << ")</text>\n";
  for (const auto& r : rows) {
    os << "<circle cx=\"" << fixed(x(static_cast<double>(r.units)), 1) << "\" cy=\"" << fixed(y(r.seconds), 1)
       << "\" r=\"4\" fill=\"" << colour(r.outcome) << "\"><title>" << r.id << " " << to_string(r.outcome)
       << "</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

EvalResult run_eval(const Manifest& manifest, const EvalOptions& options) {
  std::map<fs::path, std::unique_ptr<Harness>> harnesses;
  auto harness_for = [&](const ManifestEntry& e) -> const Harness& {
    const fs::path p = e.harness.empty() ? manifest.harness : e.harness;
    auto it = harnesses.find(p);
    if (it == harnesses.end()) it = harnesses.emplace(p, make_harness(p)).first;
    return *it->second;
  };
  for (const auto& e : manifest.commits) harness_for(e);

  EvalResult result;
  result.commits.resize(manifest.commits.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= manifest.commits.size()) return;
      const ManifestEntry& e = manifest.commits[i];
      try {
        ExtractOptions o = options.extract;
        if (e.budget_mins) {
          o.budget.wall = std::chrono::milliseconds(static_cast<long long>(std::llround(*e.budget_mins * 60000.0)));
        }
        if (e.max_units) o.budget.max_units = *e.max_units;
        o.commit_id = e.id;
        const std::string truth = read_file(e.truth);
        const fs::path out = options.out.empty() ? fs::path() : options.out / "commits" / e.id;
        CommitEval ce;
        // Unreadable inputs are a setup failure of this commit only.
        std::optional<SourceTree> old_v, new_v;
        try {
          old_v = load_tree(e.old_path);
          new_v = load_tree(e.new_path);
        } catch (const std::runtime_error& err) {
          ce.id = e.id;
          ce.project = e.project;
          ce.report.id = e.id;
          ce.report.outcome = Outcome::Unbuildable;
          ce.report.detail = err.what();
          ce.n2 = changed_lines(truth);
          if (!out.empty()) {
            fs::create_directories(out);
            write_file_atomic(out / "report.json", to_json(ce.report).dump(2) + "\n");
          }
        }
        if (old_v && new_v) ce = evaluate_commit(e.id, e.project, *old_v, *new_v, truth, harness_for(e), o, out);
        result.commits[i] = std::move(ce);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const unsigned jobs = std::max(1u, options.commit_jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.metrics = compute_metrics(result.commits);
  if (!options.out.empty()) {
    fs::create_directories(options.out);
    write_file_atomic(options.out / "metrics.csv", metrics_csv(result.commits));
    write_file_atomic(options.out / "metrics.json", to_json(result.metrics).dump(2) + "\n");
    if (!result.metrics.runtime.empty()) {
      write_file_atomic(options.out / "runtime.csv", runtime_csv(result.metrics.runtime));
      if (options.plot) write_file_atomic(options.out / "runtime.svg", runtime_svg(result.metrics.runtime));
    }
  }
  return result;
}

}  // namespace pd
