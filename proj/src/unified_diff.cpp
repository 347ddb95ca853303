#include <sstream>
#include <unordered_map>

#include "lcs.hpp"
#include "patchdistill/change_model.hpp"

namespace pd {

namespace {

constexpr std::size_t kContext = 3;

std::vector<std::string> split_lines(const std::string& text, bool& final_newline) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      final_newline = false;
      return out;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  final_newline = true;
  return out;
}

std::string range(std::size_t first, std::size_t count) {
  // Empty ranges name the line before them.
  const std::size_t start = count == 0 ? first : first + 1;
  if (count == 1) return std::to_string(start);
  return std::to_string(start) + "," + std::to_string(count);
}

enum class Op { Keep, Del, Add };

struct Step {
  Op op;
  std::size_t a;  // index into old lines (Keep, Del)
  std::size_t b;  // index into new lines (Keep, Add)
};

std::vector<Step> line_script(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string, std::uint32_t> ids;
  auto intern = [&](const std::vector<std::string>& lines) {
    detail::Symbols out;
    for (const auto& l : lines) out.push_back(ids.emplace(l, static_cast<std::uint32_t>(ids.size())).first->second);
    return out;
  };
  const auto as = intern(a);
  const auto bs = intern(b);
  auto matches = detail::lcs_matches(as, 0, as.size(), bs, 0, bs.size());
  matches.emplace_back(a.size(), b.size());
  std::vector<Step> steps;
  std::size_t i = 0, j = 0;
  for (auto [mi, mj] : matches) {
    for (; i < mi; ++i) steps.push_back({Op::Del, i, j});
    for (; j < mj; ++j) steps.push_back({Op::Add, i, j});
    if (mi < a.size()) steps.push_back({Op::Keep, mi, mj});
    i = mi + 1;
    j = mj + 1;
  }
  return steps;
}

void file_diff(std::ostringstream& os, const std::string& path, const std::string* old_text,
               const std::string* new_text) {
  bool old_nl = true, new_nl = true;
  const auto a = old_text ? split_lines(*old_text, old_nl) : std::vector<std::string>{};
  const auto b = new_text ? split_lines(*new_text, new_nl) : std::vector<std::string>{};
  const auto steps = line_script(a, b);

  os << "--- " << (old_text ? "a/" + path : std::string("/dev/null")) << '\n';
  os << "+++ " << (new_text ? "b/" + path : std::string("/dev/null")) << '\n';

  std::size_t k = 0;
  while (k < steps.size()) {
    while (k < steps.size() && steps[k].op == Op::Keep) ++k;
    if (k == steps.size()) break;
    // Hunk spans changes separated by at most 2 * context unchanged lines.
    const std::size_t first = k >= kContext ? k - kContext : 0;
    std::size_t last = k;  // one past the last change
    std::size_t scan = k;
    while (scan < steps.size()) {
      if (steps[scan].op != Op::Keep) {
        last = ++scan;
        continue;
      }
      std::size_t run = scan;
      while (run < steps.size() && steps[run].op == Op::Keep) ++run;
      if (run == steps.size() || run - scan > 2 * kContext) break;
      scan = run;
    }
    const std::size_t stop = std::min(steps.size(), last + kContext);

    std::size_t old_count = 0, new_count = 0;
    for (std::size_t s = first; s < stop; ++s) {
      if (steps[s].op != Op::Add) ++old_count;
      if (steps[s].op != Op::Del) ++new_count;
    }
    os << "@@ -" << range(steps[first].a, old_count) << " +" << range(steps[first].b, new_count) << " @@\n";
    for (std::size_t s = first; s < stop; ++s) {
      const Step& st = steps[s];
      switch (st.op) {
        case Op::Keep:
          os << ' ' << a[st.a] << '\n';
          if (st.a + 1 == a.size() && (!old_nl || !new_nl)) {
            if (!old_nl && !new_nl) os << "\\ No newline at end of file\n";
          }
          break;
        case Op::Del:
          os << '-' << a[st.a] << '\n';
          if (st.a + 1 == a.size() && !old_nl) os << "\\ No newline at end of file\n";
          break;
        case Op::Add:
          os << '+' << b[st.b] << '\n';
          if (st.b + 1 == b.size() && !new_nl) os << "\\ No newline at end of file\n";
          break;
      }
    }
    k = stop;
  }
}

}  // namespace

std::string to_unified_diff(const SourceTree& base, const SourceTree& patched) {
  std::ostringstream os;
  auto bi = base.files.begin();
  auto pi = patched.files.begin();
  while (bi != base.files.end() || pi != patched.files.end()) {
    if (pi == patched.files.end() || (bi != base.files.end() && bi->first < pi->first)) {
      file_diff(os, bi->first, &bi->second, nullptr);
      ++bi;
    } else if (bi == base.files.end() || pi->first < bi->first) {
      file_diff(os, pi->first, nullptr, &pi->second);
      ++pi;
    } else {
      if (bi->second != pi->second) file_diff(os, bi->first, &bi->second, &pi->second);
      ++bi;
      ++pi;
    }
  }
  return os.str();
}

std::size_t changed_lines(const std::string& unified_diff) {
  std::istringstream in(unified_diff);
  std::string line;
  std::size_t count = 0;
  long old_left = 0, new_left = 0;
  while (std::getline(in, line)) {
    if (old_left > 0 || new_left > 0) {
      if (line.empty() || line[0] == ' ') {
        --old_left;
        --new_left;
      } else if (line[0] == '-') {
        --old_left;
        ++count;
      } else if (line[0] == '+') {
        --new_left;
        ++count;
      }
      continue;
    }
    if (line.rfind("@@ -", 0) != 0) continue;
    auto parse_len = [](const std::string& spec) -> long {
      const auto comma = spec.find(',');
      return comma == std::string::npos ? 1 : std::stol(spec.substr(comma + 1));
    };
    std::istringstream hs(line.substr(3));
    std::string o, n;
    hs >> o >> n;
    old_left = parse_len(o.substr(1));
    new_left = parse_len(n.substr(1));
  }
  return count;
}

std::string normalize_patch_text(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::size_t e = nl;
    while (e > start && (text[e - 1] == '\r' || text[e - 1] == ' ' || text[e - 1] == '\t')) --e;
    out.append(text, start, e - start);
    out += '\n';
    start = nl + 1;
  }
  while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
  return out;
}

}  // namespace pd
