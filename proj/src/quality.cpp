#include "transbench/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "transbench/normalize.hpp"
#include "transbench/text.hpp"

namespace transbench::quality {

using nlohmann::json;

// ---------------------------------------------------------------------------
// NCLOC

namespace {

struct CommentSyntax {
  std::string_view line;
  bool block;             // /* ... */
  bool triple_quotes;     // python ''' / """
  bool backtick_raw;      // go `...`
  bool cpp_raw;           // R"delim(...)delim"
  bool java_text_block;   // """ ... """
};

CommentSyntax syntax_for(const SubjectLanguage& lang) {
  const auto& id = lang.id();
  if (id == "python") return {"#", false, true, false, false, false};
  if (id == "go") return {"//", true, false, true, false, false};
  if (id == "cpp") return {"//", true, false, false, true, false};
  if (id == "java") return {"//", true, false, false, false, true};
  return {"//", true, false, false, false, false};
}

}  // namespace

std::size_t count_ncloc(std::string_view code, const SubjectLanguage& language) {
  const CommentSyntax syn = syntax_for(language);
  const std::string src = unify_newlines(code);
  const std::size_t n = src.size();

  std::vector<bool> has_code(1, false);
  std::size_t line = 0;
  auto newline = [&] {
    ++line;
    has_code.push_back(false);
  };
  auto at = [&](std::size_t i, std::string_view s) { return src.compare(i, s.size(), s) == 0; };

  // Scans a literal whose body ends at `terminator`; backslash escapes apply
  // when `escapes`. Every line the literal touches is code.
  auto skip_literal = [&](std::size_t i, std::string_view terminator, bool escapes, bool single_line) {
    while (i < n) {
      if (escapes && src[i] == '\\' && i + 1 < n) {
        if (src[i + 1] == '\n') {
          newline();
          has_code[line] = true;
        }
        i += 2;
        continue;
      }
      if (at(i, terminator)) return i + terminator.size();
      if (src[i] == '\n') {
        if (single_line) return i;  // unterminated: the newline is handled by the caller
        newline();
        has_code[line] = true;
      }
      ++i;
    }
    return i;
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      newline();
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (at(i, syn.line)) {
      while (i < n && src[i] != '\n') {
        // a backslash-continued // comment in C/C++ spans the next line too
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n' && syn.line == "//" &&
            (language.id() == "c" || language.id() == "cpp")) {
          newline();
          i += 2;
          continue;
        }
        ++i;
      }
      continue;
    }
    if (syn.block && at(i, "/*")) {
      i += 2;
      while (i < n && !at(i, "*/")) {
        if (src[i] == '\n') newline();
        ++i;
      }
      i = std::min(n, i + 2);
      continue;
    }

    has_code[line] = true;
    if (syn.triple_quotes && (at(i, "\"\"\"") || at(i, "'''"))) {
      const std::string term = src.substr(i, 3);
      i = skip_literal(i + 3, term, true, false);
      continue;
    }
    if (syn.java_text_block && at(i, "\"\"\"")) {
      i = skip_literal(i + 3, "\"\"\"", true, false);
      continue;
    }
    if (syn.backtick_raw && c == '`') {
      i = skip_literal(i + 1, "`", false, false);
      continue;
    }
    if (syn.cpp_raw && c == 'R' && i + 1 < n && src[i + 1] == '"' &&
        (i == 0 || !(std::isalnum(static_cast<unsigned char>(src[i - 1])) || src[i - 1] == '_'))) {
      const auto open = src.find('(', i + 2);
      if (open != std::string::npos && open - (i + 2) <= 16) {
        const std::string term = ")" + src.substr(i + 2, open - (i + 2)) + "\"";
        i = skip_literal(open + 1, term, false, false);
        continue;
      }
    }
    if (c == '"' || c == '\'') {
      // python's ' and " are both strings; in the C family ' is a char literal
      i = skip_literal(i + 1, std::string_view(&src[i], 1), true, true);
      continue;
    }
    ++i;
  }
  return static_cast<std::size_t>(std::count(has_code.begin(), has_code.end(), true));
}

// ---------------------------------------------------------------------------
// Issues

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Blocker: return "BLOCKER";
    case Severity::Critical: return "CRITICAL";
    case Severity::Other: return "OTHER";
  }
  return "OTHER";
}

Severity severity_from_string(std::string_view s) {
  std::string up(s);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (up == "BLOCKER") return Severity::Blocker;
  if (up == "CRITICAL") return Severity::Critical;
  return Severity::Other;
}

namespace {

std::string strip_project_prefix(std::string component) {
  // "project:dir/file.c" -> "dir/file.c"; no path segment contains ':'
  auto colon = component.find(':');
  if (colon != std::string::npos && component.find('/') > colon) component.erase(0, colon + 1);
  return component;
}

}  // namespace

std::vector<Issue> parse_export(const json& exported) {
  if (!exported.is_object() || !exported.contains("issues") || !exported["issues"].is_array())
    throw QualityError("MalformedExport", "export must be an object with an \"issues\" array");
  std::vector<Issue> out;
  std::size_t index = 0;
  for (const auto& item : exported["issues"]) {
    auto field = [&](const char* name) -> std::string {
      if (!item.is_object() || !item.contains(name) || !item[name].is_string())
        throw QualityError("MalformedExport",
                           "issue " + std::to_string(index) + ": missing string field \"" + name + "\"");
      return item[name].get<std::string>();
    };
    Issue issue;
    issue.rule_id = field("rule");
    issue.severity = severity_from_string(field("severity"));
    issue.message = field("message");
    issue.file = strip_project_prefix(field("component"));
    const auto ext = std::filesystem::path(issue.file).extension().string();
    issue.language = SubjectLanguage(language_id_for_extension(ext.empty() ? "" : ext.substr(1)));
    out.push_back(std::move(issue));
    ++index;
  }
  return out;
}

std::vector<Issue> load_export(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw QualityError("MalformedExport", path.string() + ": " + e.what());
  }
  return parse_export(j);
}

std::vector<Issue> ingest_issues(const json& exported, const std::set<std::string>& compiled) {
  auto all = parse_export(exported);
  std::erase_if(all, [&](const Issue& i) { return compiled.find(i.file) == compiled.end(); });
  return all;
}

std::vector<MessageShare> top_messages(const std::vector<Issue>& issues, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& i : issues) {
    if (!i.headline()) continue;
    ++counts[i.message];
    ++total;
  }
  std::vector<MessageShare> out;
  for (const auto& [msg, n] : counts)
    out.push_back({msg, n, static_cast<double>(n) / static_cast<double>(total)});
  std::stable_sort(out.begin(), out.end(), [](const MessageShare& a, const MessageShare& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.message < b.message;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::optional<double> density(std::size_t issue_count, std::size_t ncloc) {
  if (ncloc == 0) return std::nullopt;
  return 1000.0 * static_cast<double>(issue_count) / static_cast<double>(ncloc);
}

// ---------------------------------------------------------------------------
// Reports

std::vector<CompiledFile> compiled_files(const std::vector<pipeline::TranslationAttempt>& attempts) {
  std::vector<CompiledFile> out;
  for (const auto& a : attempts) {
    if (a.environment_error) continue;
    const bool pre_ok = a.initial_compile == CompileStatus::Ok;
    const bool post_ok = pre_ok || (a.repair && a.repair->fixed);
    for (auto phase : {metrics::Phase::PreRepair, metrics::Phase::PostRepair}) {
      const bool pre = phase == metrics::Phase::PreRepair;
      if (!(pre ? pre_ok : post_ok)) continue;
      CompiledFile f;
      f.key = {a.dataset_id, a.source_language.id(), a.target_language.id(), a.approach, phase};
      f.code = pre ? a.candidate_code : a.final_code;
      f.path = a.dataset_id + "/" + std::string(pipeline::to_string(a.approach)) + "/" +
               std::string(metrics::to_string(phase)) + "/" + a.source_language.id() + "-" +
               a.target_language.id() + "/" + a.sample_id + "." + a.target_language.file_extension();
      out.push_back(std::move(f));
    }
  }
  return out;
}

void export_compiled_code(const std::vector<CompiledFile>& files, const std::filesystem::path& root) {
  for (const auto& f : files) text::write_file(root / f.path, f.code + "\n");
}

QualityReport build_report(const std::vector<CompiledFile>& files, const std::vector<Issue>& issues,
                           std::size_t top_k) {
  std::map<std::string, std::size_t> per_file_issues;
  std::set<std::string> known;
  for (const auto& f : files) known.insert(f.path);
  std::vector<Issue> kept;
  for (const auto& i : issues) {
    if (known.count(i.file) == 0) continue;
    kept.push_back(i);
    if (i.headline()) ++per_file_issues[i.file];
  }

  QualityReport r;
  for (const auto& f : files) {
    const std::size_t ncloc = count_ncloc(f.code, SubjectLanguage(f.key.target));
    const std::size_t n = per_file_issues.count(f.path) ? per_file_issues[f.path] : 0;
    auto& cell = r.cells[f.key];
    cell.issue_count += n;
    cell.ncloc += ncloc;
    ++cell.files;
    r.per_file.push_back({f.key.dataset,
                          std::string(pipeline::to_string(f.key.approach)) + "/" +
                              std::string(metrics::to_string(f.key.phase)),
                          f.path, density(n, ncloc)});
  }
  std::sort(r.per_file.begin(), r.per_file.end(), [](const FileDensity& a, const FileDensity& b) {
    return std::tie(a.dataset, a.method, a.file) < std::tie(b.dataset, b.method, b.file);
  });
  r.top = top_messages(kept, top_k);
  return r;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(std::optional<double> v, int digits) {
  if (!v) return std::string(metrics::kUndefined);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

}  // namespace

std::string to_csv(const QualityReport& r) {
  std::ostringstream out;
  out << "dataset,source,target,approach,phase,issues,ncloc,density\n";
  for (const auto& [k, c] : r.cells) {
    out << csv_field(k.dataset) << ',' << k.source << ',' << k.target << ',' << pipeline::to_string(k.approach)
        << ',' << metrics::to_string(k.phase) << ',' << c.issue_count << ',' << c.ncloc << ','
        << fixed(c.density(), 4) << '\n';
  }
  return out.str();
}

std::string distribution_csv(const QualityReport& r) {
  std::ostringstream out;
  out << "dataset,method,file,density\n";
  for (const auto& f : r.per_file)
    out << csv_field(f.dataset) << ',' << csv_field(f.method) << ',' << csv_field(f.file) << ','
        << fixed(f.density, 4) << '\n';
  return out.str();
}

std::string top_messages_csv(const QualityReport& r) {
  std::ostringstream out;
  out << "rank,count,share,message\n";
  std::size_t rank = 0;
  for (const auto& m : r.top)
    out << ++rank << ',' << m.count << ',' << fixed(m.share, 6) << ',' << csv_field(m.message) << '\n';
  return out.str();
}

}  // namespace transbench::quality
