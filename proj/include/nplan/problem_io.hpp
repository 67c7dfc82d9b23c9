#pragma once

// Reading and writing the problem document (`.nprp`): a JSON object with the
// sections `fluents`, `initial`, `actions`, `goals` and `norms`.

#include <nplan/model.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace nplan {

namespace detail {

using json = nlohmann::json;

inline std::string line_col(std::string_view text, std::size_t byte)
{
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class DocumentReader
{
public:
  const json& require(const json& obj, const char* key, const std::string& where) const
  {
    auto it = obj.find(key);
    if (it == obj.end())
      throw ProblemError(where, std::string("missing field '") + key + "'");
    return *it;
  }

  void expect_object(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) const
  {
    if (!j.is_object())
      throw ProblemError(where, "expected an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ProblemError(where + "/" + key, "unknown field");
    }
  }

  std::string string_at(const json& j, const std::string& where) const
  {
    if (!j.is_string())
      throw ProblemError(where, "expected a string");
    return j.get<std::string>();
  }

  std::int64_t integer_at(const json& j, const std::string& where) const
  {
    if (!j.is_number_integer())
      throw ProblemError(where, "expected an integer");
    return j.get<std::int64_t>();
  }

  std::vector<std::string> strings_at(const json& j, const std::string& where) const
  {
    if (!j.is_array())
      throw ProblemError(where, "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(string_at(j[i], where + "/" + std::to_string(i)));
    return out;
  }

  std::vector<std::string> optional_strings(const json& obj, const char* key, const std::string& where) const
  {
    auto it = obj.find(key);
    return it == obj.end() ? std::vector<std::string>{} : strings_at(*it, where + "/" + key);
  }

  const json& array_at(const json& obj, const char* key, const std::string& where, bool required) const
  {
    static const json empty = json::array();
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required)
        throw ProblemError(where, std::string("missing section '") + key + "'");
      return empty;
    }
    if (!it->is_array())
      throw ProblemError(where + "/" + key, "expected a list");
    return *it;
  }
};

} // namespace detail

/// Parses the document into a Problem without semantic validation. Throws
/// ProblemError on malformed JSON or wrongly typed fields.
inline Problem read_problem_document(std::string_view text)
{
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ProblemError(detail::line_col(text, e.byte), "syntax error: " + std::string(e.what()));
  }

  detail::DocumentReader rd;
  rd.expect_object(doc, "", {"name", "fluents", "initial", "actions", "goals", "norms"});

  Problem p;
  if (auto it = doc.find("name"); it != doc.end())
    p.name = rd.string_at(*it, "/name");
  p.fluents = rd.strings_at(rd.require(doc, "fluents", ""), "/fluents");
  p.initial = rd.optional_strings(doc, "initial", "");

  const auto& actions = rd.array_at(doc, "actions", "", true);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto base = "/actions/" + std::to_string(i);
    const auto& a = actions[i];
    rd.expect_object(a, base, {"name", "duration", "pre", "post"});
    DurativeAction act;
    act.name = rd.string_at(rd.require(a, "name", base), base + "/name");
    act.duration = rd.integer_at(rd.require(a, "duration", base), base + "/duration");
    act.pre = LiteralSet::from_strings(rd.optional_strings(a, "pre", base));
    act.post = LiteralSet::from_strings(rd.optional_strings(a, "post", base));
    p.actions.push_back(std::move(act));
  }

  const auto& goals = rd.array_at(doc, "goals", "", false);
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto base = "/goals/" + std::to_string(i);
    const auto& g = goals[i];
    rd.expect_object(g, base, {"name", "value", "requirements"});
    Goal goal;
    goal.name = rd.string_at(rd.require(g, "name", base), base + "/name");
    goal.value = rd.integer_at(rd.require(g, "value", base), base + "/value");
    goal.requirements = LiteralSet::from_strings(rd.optional_strings(g, "requirements", base));
    p.goals.push_back(std::move(goal));
  }

  const auto& norms = rd.array_at(doc, "norms", "", false);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const auto base = "/norms/" + std::to_string(i);
    const auto& n = norms[i];
    rd.expect_object(n, base, {"name", "kind", "condition", "subject", "deadline", "cost"});
    Norm norm;
    norm.name = rd.string_at(rd.require(n, "name", base), base + "/name");
    const auto kind = rd.string_at(rd.require(n, "kind", base), base + "/kind");
    if (kind == "obligation")
      norm.kind = NormKind::obligation;
    else if (kind == "prohibition")
      norm.kind = NormKind::prohibition;
    else
      throw ProblemError(base + "/kind", "expected \"obligation\" or \"prohibition\", got \"" + kind + "\"");
    norm.condition = rd.string_at(rd.require(n, "condition", base), base + "/condition");
    norm.subject = rd.string_at(rd.require(n, "subject", base), base + "/subject");
    norm.deadline = rd.integer_at(rd.require(n, "deadline", base), base + "/deadline");
    norm.cost = rd.integer_at(rd.require(n, "cost", base), base + "/cost");
    p.norms.push_back(std::move(norm));
  }
  return p;
}

/// Parses and validates; throws ProblemError on the first error.
inline Problem parse_problem(std::string_view text)
{
  auto p = read_problem_document(text);
  require_valid(p);
  return p;
}

inline nlohmann::json to_json(const Problem& p)
{
  using detail::json;
  json doc;
  doc["name"] = p.name;
  doc["fluents"] = p.fluents;
  doc["initial"] = p.initial;
  doc["actions"] = json::array();
  for (const auto& a : p.actions)
    doc["actions"].push_back(
      {{"name", a.name}, {"duration", a.duration}, {"pre", a.pre.to_strings()}, {"post", a.post.to_strings()}});
  doc["goals"] = json::array();
  for (const auto& g : p.goals)
    doc["goals"].push_back({{"name", g.name}, {"value", g.value}, {"requirements", g.requirements.to_strings()}});
  doc["norms"] = json::array();
  for (const auto& n : p.norms)
    doc["norms"].push_back({{"name", n.name},
                            {"kind", std::string(to_string(n.kind))},
                            {"condition", n.condition},
                            {"subject", n.subject},
                            {"deadline", n.deadline},
                            {"cost", n.cost}});
  return doc;
}

inline std::string serialize_problem(const Problem& p) { return to_json(p).dump(2) + "\n"; }

inline std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Problem load_problem(const std::filesystem::path& path) { return parse_problem(read_text_file(path)); }

} // namespace nplan
