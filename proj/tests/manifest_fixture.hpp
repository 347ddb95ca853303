#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "patchdistill/change_model.hpp"
#include "patchdistill/source_tree.hpp"

namespace pd::fixtures {

// Commit `i` fixes Calc.f; a tangled commit also rewrites Calc.g, which the
// ground truth leaves out.
inline pd::SourceTree calc_version(int i, bool fixed, bool tangled) {
  const std::string k = std::to_string(10 + i);
  const std::string f = fixed ? k + " + 1" : k;
  const std::string g = tangled ? "2 - 1" : "1";
  pd::SourceTree t;
  t.files["src/calc/Calc.ml4j"] = "package calc;\n\nclass Calc {\n    static int f() {\n        return " + f +
                                  ";\n    }\n\n    static int g() {\n        return " + g + ";\n    }\n}\n";
  std::string tests = "package calc;\n\nclass CalcTest {\n    void test_g() {\n        assert Calc.g() == 1;\n    }\n";
  if (fixed) {
    tests += "\n    void test_f() {\n        assert Calc.f() == " + std::to_string(11 + i) + ";\n    }\n";
  }
  t.files["tests/calc/CalcTest.ml4j"] = tests + "}\n";
  return pd::normalize(t);
}

// Ten commits, the first `identical` of which are pure fixes.
inline std::filesystem::path write_calc_manifest(const std::filesystem::path& dir, int identical = 4) {
  nlohmann::ordered_json m;
  m["commits"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 10; ++i) {
    const bool tangled = i >= identical;
    const std::string id = "calc-" + std::to_string(i);
    const auto root = dir / id;
    const pd::SourceTree old_v = calc_version(i, false, false);
    pd::write_tree(old_v, root / "old");
    pd::write_tree(calc_version(i, true, tangled), root / "new");
    pd::write_file(root / "truth.diff",
                   pd::to_unified_diff(old_v.program_files(), calc_version(i, true, false).program_files()));
    m["commits"].push_back({{"id", id},
                            {"project", tangled ? "tangled" : "pure"},
                            {"old", id + "/old"},
                            {"new", id + "/new"},
                            {"truth", id + "/truth.diff"}});
  }
  const auto path = dir / "manifest.json";
  pd::write_file(path, m.dump(2) + "\n");
  return path;
}

}  // namespace pd::fixtures
