#pragma once

// Domain types for a normative planning problem: fluents, durative actions,
// valued goals and conditional norms with deadlines.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nplan {

using Time = std::int64_t;
using Utility = std::int64_t;

/// A fluent or its negation. The fluent is referred to by name.
struct Literal
{
  std::string fluent;
  bool positive = true;

  auto operator<=>(const Literal&) const = default;
};

/// Parses the textual literal form: `name` or `!name`.
inline Literal parse_literal(std::string_view text)
{
  if (!text.empty() && text.front() == '!')
    return Literal{std::string(text.substr(1)), false};
  return Literal{std::string(text), true};
}

inline std::string to_string(const Literal& lit)
{
  return lit.positive ? lit.fluent : "!" + lit.fluent;
}

/// Sorted, duplicate-free set of literals. Contradictory members are kept so
/// that validation can report them; see well_defined().
class LiteralSet
{
public:
  LiteralSet() = default;
  LiteralSet(std::initializer_list<Literal> lits) : members_(lits) { normalize(); }
  explicit LiteralSet(std::vector<Literal> lits) : members_(std::move(lits)) { normalize(); }

  static LiteralSet from_strings(const std::vector<std::string>& texts)
  {
    std::vector<Literal> lits;
    lits.reserve(texts.size());
    for (const auto& t : texts)
      lits.push_back(parse_literal(t));
    return LiteralSet(std::move(lits));
  }

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  std::vector<std::string> positives() const { return select(true); }
  std::vector<std::string> negatives() const { return select(false); }

  /// Fluents that occur with both polarities. Empty iff the set is well-defined.
  std::vector<std::string> contradictions() const
  {
    std::vector<std::string> out;
    const auto pos = positives();
    const auto neg = negatives();
    std::set_intersection(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(out));
    return out;
  }

  bool well_defined() const { return contradictions().empty(); }

  std::vector<std::string> to_strings() const
  {
    std::vector<std::string> out;
    out.reserve(members_.size());
    for (const auto& l : members_)
      out.push_back(to_string(l));
    return out;
  }

  bool operator==(const LiteralSet&) const = default;

private:
  void normalize()
  {
    std::sort(members_.begin(), members_.end(), [](const Literal& a, const Literal& b) {
      return std::tie(a.fluent, a.positive) < std::tie(b.fluent, b.positive);
    });
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  std::vector<std::string> select(bool positive) const
  {
    std::vector<std::string> out;
    for (const auto& l : members_)
      if (l.positive == positive)
        out.push_back(l.fluent);
    return out;
  }

  std::vector<Literal> members_;
};

struct DurativeAction
{
  std::string name;
  LiteralSet pre;
  LiteralSet post;
  Time duration = 1;

  bool operator==(const DurativeAction&) const = default;
};

struct Goal
{
  std::string name;
  LiteralSet requirements;
  Utility value = 1;

  bool operator==(const Goal&) const = default;
};

enum class NormKind { obligation, prohibition };

inline std::string_view to_string(NormKind k)
{
  return k == NormKind::obligation ? "obligation" : "prohibition";
}

/// Executing `condition` obliges (or forbids) starting `subject` within
/// `deadline` time units of the end of `condition`; violation costs `cost`.
struct Norm
{
  std::string name;
  NormKind kind = NormKind::obligation;
  std::string condition;
  std::string subject;
  Time deadline = 0;
  Utility cost = 1;

  bool operator==(const Norm&) const = default;
};

/// The problem tuple. Collections keep document order; everything downstream
/// orders by name, so results never depend on it.
struct Problem
{
  std::string name = "problem";
  std::vector<std::string> fluents;
  std::vector<std::string> initial;
  std::vector<DurativeAction> actions;
  std::vector<Goal> goals;
  std::vector<Norm> norms;

  bool operator==(const Problem&) const = default;

  const DurativeAction* find_action(std::string_view n) const
  {
    for (const auto& a : actions)
      if (a.name == n)
        return &a;
    return nullptr;
  }
};

enum class Severity { error, warning };

struct Finding
{
  Severity severity;
  std::string where;   // JSON-pointer-like path, e.g. /actions/2/duration
  std::string message;
};

struct ValidationReport
{
  std::vector<Finding> findings;

  bool ok() const { return error_count() == 0; }

  std::size_t error_count() const
  {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
      return f.severity == Severity::error;
    }));
  }

  std::size_t warning_count() const { return findings.size() - error_count(); }

  bool mentions(std::string_view text) const
  {
    return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) {
      return f.message.find(text) != std::string::npos;
    });
  }
};

/// Raised for malformed or invalid problem documents. `where` names the
/// offending line or field.
class ProblemError : public std::runtime_error
{
public:
  ProblemError(std::string where, const std::string& message)
    : std::runtime_error(where.empty() ? message : where + ": " + message), where_(std::move(where))
  {
  }

  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

namespace detail {

class FindingSink
{
public:
  explicit FindingSink(ValidationReport& r) : report_(r) {}

  void error(std::string where, std::string msg)
  {
    report_.findings.push_back({Severity::error, std::move(where), std::move(msg)});
  }

  void warning(std::string where, std::string msg)
  {
    report_.findings.push_back({Severity::warning, std::move(where), std::move(msg)});
  }

private:
  ValidationReport& report_;
};

inline void check_literals(const LiteralSet& set, const std::set<std::string>& universe, const std::string& where,
                           FindingSink& sink)
{
  for (const auto& lit : set)
    if (!universe.count(lit.fluent))
      sink.error(where, "unknown fluent '" + lit.fluent + "'");
  for (const auto& f : set.contradictions())
    sink.error(where, "ill-defined literal set: '" + f + "' occurs both positively and negatively");
}

template <class Items>
void check_unique_names(const Items& items, const std::string& section, FindingSink& sink)
{
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& n = items[i].name;
    const auto where = "/" + section + "/" + std::to_string(i) + "/name";
    if (n.empty())
      sink.error(where, "empty name");
    else if (auto [it, fresh] = seen.emplace(n, i); !fresh)
      sink.error(where, "duplicate name '" + n + "' (first at index " + std::to_string(it->second) + ")");
  }
}

} // namespace detail

/// Checks every structural invariant of the problem tuple. Never throws.
inline ValidationReport validate_problem(const Problem& p)
{
  ValidationReport report;
  detail::FindingSink sink(report);

  std::set<std::string> universe;
  for (std::size_t i = 0; i < p.fluents.size(); ++i) {
    const auto& f = p.fluents[i];
    const auto where = "/fluents/" + std::to_string(i);
    if (f.empty())
      sink.error(where, "empty fluent name");
    else if (!universe.insert(f).second)
      sink.error(where, "duplicate fluent '" + f + "'");
  }

  for (std::size_t i = 0; i < p.initial.size(); ++i)
    if (!universe.count(p.initial[i]))
      sink.error("/initial/" + std::to_string(i), "unknown fluent '" + p.initial[i] + "'");

  if (p.actions.empty())
    sink.error("/actions", "the action set must be non-empty");
  detail::check_unique_names(p.actions, "actions", sink);
  std::set<std::string> action_names;
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    const auto& a = p.actions[i];
    const auto base = "/actions/" + std::to_string(i);
    action_names.insert(a.name);
    if (a.duration < 1)
      sink.error(base + "/duration", "duration must be positive, got " + std::to_string(a.duration));
    detail::check_literals(a.pre, universe, base + "/pre", sink);
    detail::check_literals(a.post, universe, base + "/post", sink);
  }

  if (p.goals.empty())
    sink.warning("/goals", "empty goal set: no plan can exist");
  detail::check_unique_names(p.goals, "goals", sink);
  for (std::size_t i = 0; i < p.goals.size(); ++i) {
    const auto& g = p.goals[i];
    const auto base = "/goals/" + std::to_string(i);
    if (g.value < 1)
      sink.error(base + "/value", "value must be positive, got " + std::to_string(g.value));
    if (g.requirements.empty())
      sink.warning(base + "/requirements", "goal '" + g.name + "' has no requirements and is satisfied in every state");
    detail::check_literals(g.requirements, universe, base + "/requirements", sink);
  }

  detail::check_unique_names(p.norms, "norms", sink);
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    const auto& n = p.norms[i];
    const auto base = "/norms/" + std::to_string(i);
    if (!action_names.count(n.condition))
      sink.error(base + "/condition", "unknown action '" + n.condition + "'");
    if (!action_names.count(n.subject))
      sink.error(base + "/subject", "unknown action '" + n.subject + "'");
    if (n.cost < 1)
      sink.error(base + "/cost", "cost must be positive, got " + std::to_string(n.cost));
    if (n.deadline < 0)
      sink.error(base + "/deadline", "deadline must be non-negative, got " + std::to_string(n.deadline));
    else if (n.deadline == 0)
      sink.warning(base + "/deadline", "norm '" + n.name + "' has an empty compliance window");
    if (n.condition == n.subject)
      sink.warning(base + "/subject", "norm '" + n.name + "' has the same condition and subject action");
  }

  return report;
}

/// Throws ProblemError carrying the first error, if any.
inline void require_valid(const Problem& p)
{
  const auto report = validate_problem(p);
  for (const auto& f : report.findings)
    if (f.severity == Severity::error)
      throw ProblemError(f.where, f.message);
}

} // namespace nplan
