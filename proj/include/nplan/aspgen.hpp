#pragma once

// Answer-set program generation for a normative planning problem, and the
// reverse direction: reading solver models back into schedules and checking
// them against the native semantics.

#include <nplan/planner.hpp>

#include <cctype>
#include <sstream>

namespace nplan {

inline constexpr std::string_view generator_version = "nplan 1.0.0";

class AspError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Maps problem identifiers to ASP constants: lower-cased, with numeric
/// suffixes for names that collide after lower-casing. Reversible.
class NameMangler
{
public:
  explicit NameMangler(const Problem& p)
  {
    std::vector<std::string> names = p.fluents;
    for (const auto& a : p.actions)
      names.push_back(a.name);
    for (const auto& g : p.goals)
      names.push_back(g.name);
    for (const auto& n : p.norms)
      names.push_back(n.name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    std::set<std::string> taken(reserved().begin(), reserved().end());
    for (const auto& n : names) {
      const auto base = lower(n);
      auto candidate = base;
      for (int suffix = 2; taken.count(candidate); ++suffix)
        candidate = base + "_" + std::to_string(suffix);
      taken.insert(candidate);
      forward_.emplace(n, candidate);
      backward_.emplace(candidate, n);
    }
  }

  const std::string& mangle(const std::string& name) const
  {
    auto it = forward_.find(name);
    if (it == forward_.end())
      throw AspError("no ASP name for '" + name + "'");
    return it->second;
  }

  std::optional<std::string> unmangle(const std::string& constant) const
  {
    auto it = backward_.find(constant);
    return it == backward_.end() ? std::nullopt : std::optional(it->second);
  }

  const std::map<std::string, std::string>& table() const { return forward_; }

private:
  static const std::vector<std::string>& reserved()
  {
    static const std::vector<std::string> words{"not", "o", "f"};
    return words;
  }

  static std::string lower(const std::string& name)
  {
    if (name.empty())
      throw AspError("empty identifier");
    std::string out;
    for (unsigned char c : name) {
      if (!(std::isalnum(c) || c == '_') || c > 127)
        throw AspError("identifier '" + name + "' is not representable as an ASP constant");
      out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (!std::islower(static_cast<unsigned char>(out.front())))
      out = "c_" + out;
    return out;
  }

  std::map<std::string, std::string> forward_;
  std::map<std::string, std::string> backward_;
};

struct AspProgram
{
  Time horizon = 0;
  std::vector<std::string> header;              // `%` comment lines
  std::vector<std::string> base_rules;          // the planning encoding
  std::vector<std::string> optimization_rules;  // utility and #maximize

  std::string text(bool with_optimization) const
  {
    std::string out;
    for (const auto* part : {&header, &base_rules})
      for (const auto& line : *part)
        out += line + "\n";
    if (with_optimization)
      for (const auto& line : optimization_rules)
        out += line + "\n";
    return out;
  }
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i)
      out += sep;
    out += parts[i];
  }
  return out;
}

/// Body literals for "the literal set holds at S".
inline std::vector<std::string> holds_body(const LiteralSet& set, const NameMangler& names)
{
  std::vector<std::string> body;
  for (const auto& f : set.positives())
    body.push_back("holdsat(" + names.mangle(f) + ",S)");
  for (const auto& f : set.negatives())
    body.push_back("not holdsat(" + names.mangle(f) + ",S)");
  body.push_back("state(S)");
  return body;
}

} // namespace detail

/// The rules of the optimization block: goal value, violated instances,
/// violation cost, utility and the #maximize statement (last line).
inline std::vector<std::string> emit_optimization()
{
  return {
    "value(TV) :- TV = #sum {V,G: goal(G,V), satisfied(G)}.",
    "violated(N,S1) :- vol(o(N,S1,A,DL),S2), state(S1), state(S2).",
    "violated(N,S1) :- vol(f(N,S1,A,DL),S2), state(S1), state(S2).",
    "cost(TC) :- TC = #sum {C,N,S: violated(N,S), norm(N,C)}.",
    "utility(TV-TC) :- value(TV), cost(TC).",
    "#maximize {U:utility(U)}.",
  };
}

/// Emits the planning encoding of `d` over states 0..horizon. Norm compliance
/// follows `mode`; start_only gives the classic encoding.
inline AspProgram emit_base_program(const Domain& d, Time horizon,
                                    ComplianceMode mode = ComplianceMode::start_only)
{
  if (horizon < 1)
    throw AspError("horizon must be ≥ 1");
  const NameMangler names(d.problem());
  AspProgram prog;
  prog.horizon = horizon;

  prog.header = {
    "% normative planning encoding",
    "% problem: " + d.problem().name,
    "% horizon: " + std::to_string(horizon),
    "% generator: " + std::string(generator_version),
    "% compliance: " + std::string(to_string(mode)),
  };
  for (const auto& [from, to] : names.table())
    prog.header.push_back("% name: " + from + " = " + to);

  auto& r = prog.base_rules;
  auto emit = [&r](std::string line) { r.push_back(std::move(line)); };
  const auto& M = names;

  emit("% states");
  for (Time k = 0; k <= horizon; ++k)
    emit("state(" + std::to_string(k) + ").");

  emit("% initial state");
  for (auto i = d.initial_state().find_first(); i != FluentBits::npos; i = d.initial_state().find_next(i))
    emit("holdsat(" + M.mangle(d.fluent_name(i)) + ",0).");

  emit("% inertia");
  emit("holdsat(X,S2) :- holdsat(X,S1), not terminated(X,S1), state(S1), state(S2), S2=S1+1.");

  emit("% actions");
  for (ActionId id = 0; id < d.actions().size(); ++id) {
    const auto& src = *d.problem().find_action(d.action(id).name);
    const auto a = M.mangle(src.name);
    const auto dur = std::to_string(src.duration);
    emit("action(" + a + "," + dur + ").");
    emit("pre(" + a + ",S) :- " + detail::join(detail::holds_body(src.pre, M), ", ") + ".");
  }

  emit("% execution");
  emit("{executed(A,S)} :- action(A,D), state(S).");
  emit("inprog(A,S2) :- executed(A,S1), action(A,D), state(S1), state(S2), S1<=S2, S2<S1+D.");
  emit(":- inprog(A,S), action(A,D), state(S), not pre(A,S).");
  emit(":- executed(A1,S), executed(A2,S), A1!=A2, action(A1,D1), action(A2,D2), state(S).");
  emit(":- executed(A,S), action(A,D), state(S), not state(S+D).");

  emit("% effects");
  for (ActionId id = 0; id < d.actions().size(); ++id) {
    const auto& src = *d.problem().find_action(d.action(id).name);
    const auto a = M.mangle(src.name);
    const auto dur = std::to_string(src.duration);
    for (const auto& f : src.post.positives())
      emit("holdsat(" + M.mangle(f) + ",S2) :- executed(" + a + ",S1), action(" + a + "," + dur +
           "), state(S1), state(S2), S2=S1+" + dur + ".");
    for (const auto& f : src.post.negatives())
      emit("terminated(" + M.mangle(f) + ",S2) :- executed(" + a + ",S1), action(" + a + "," + dur +
           "), state(S1), state(S2), S2=S1+" + dur + "-1.");
  }

  emit("% goals");
  for (const auto& g : d.goals()) {
    const auto& src = *std::find_if(d.problem().goals.begin(), d.problem().goals.end(),
                                    [&](const Goal& x) { return x.name == g.name; });
    const auto gn = M.mangle(g.name);
    emit("goal(" + gn + "," + std::to_string(g.value) + ").");
    emit("satisfied(" + gn + ",S) :- " + detail::join(detail::holds_body(src.requirements, M), ", ") + ".");
  }

  emit("% norms");
  for (const auto& n : d.norms()) {
    const auto nn = M.mangle(n.name);
    const auto& cond = d.action(n.condition);
    const auto& sub = d.action(n.subject);
    const auto c = M.mangle(cond.name);
    const auto s = M.mangle(sub.name);
    const auto dc = std::to_string(cond.duration);
    const auto ds = std::to_string(sub.duration);
    const bool obligation = n.kind == NormKind::obligation;
    const std::string fn = obligation ? "o" : "f";
    const auto fluent = fn + "(" + nn + ",S1," + s + ",DL)";
    const std::string window = mode == ComplianceMode::start_and_end ? ", S2+" + ds + "<DL" : "";

    emit("norm(" + nn + "," + std::to_string(n.cost) + ").");
    emit("holdsat(" + fn + "(" + nn + ",S1," + s + "," + std::to_string(n.deadline) + "+S2),S2) :- executed(" + c +
         ",S1), action(" + c + "," + dc + "), S2=S1+" + dc + ", state(S1), state(S2).");
    const auto on_subject = "holdsat(" + fluent + ",S2), executed(" + s + ",S2), action(" + s + "," + ds +
                            "), state(S1), state(S2), S2!=DL" + window + ".";
    const auto on_deadline = "holdsat(" + fluent + ",S2), DL=S2, state(S1), state(S2).";
    if (obligation) {
      emit("cmp(" + fluent + ",S2) :- " + on_subject);
      emit("terminated(" + fluent + ",S2) :- cmp(" + fluent + ",S2), state(S1), state(S2).");
      emit("vol(" + fluent + ",S2) :- " + on_deadline);
      emit("terminated(" + fluent + ",S2) :- vol(" + fluent + ",S2), state(S1), state(S2).");
    } else {
      emit("cmp(" + fluent + ",S2) :- " + on_deadline);
      emit("terminated(" + fluent + ",S2) :- cmp(" + fluent + ",S2), state(S1), state(S2).");
      emit("vol(" + fluent + ",S2) :- " + on_subject);
      emit("terminated(" + fluent + ",S2) :- vol(" + fluent + ",S2), state(S1), state(S2).");
    }
  }

  emit("% at least one goal");
  std::vector<std::string> unsatisfied;
  for (const auto& g : d.goals()) {
    emit("satisfied(" + M.mangle(g.name) + ") :- satisfied(" + M.mangle(g.name) + ",S), state(S).");
    unsatisfied.push_back("not satisfied(" + M.mangle(g.name) + ")");
  }
  emit(unsatisfied.empty() ? ":- #true." : ":- " + detail::join(unsatisfied, ", ") + ".");

  emit("% conflicting actions");
  for (const auto& [a1, a2] : conflicting_actions(d)) {
    const auto& x = d.action(*d.action_id(a1));
    const auto& y = d.action(*d.action_id(a2));
    const auto mx = M.mangle(x.name);
    const auto dx = std::to_string(x.duration);
    if (a1 == a2) {
      emit(":- executed(" + mx + ",S1), executed(" + mx + ",S2), action(" + mx + "," + dx +
           "), state(S1), state(S2), S1<S2, S2<S1+" + dx + ".");
    } else {
      const auto my = M.mangle(y.name);
      emit(":- inprog(" + mx + ",S), inprog(" + my + ",S), action(" + mx + "," + dx + "), action(" + my + "," +
           std::to_string(y.duration) + "), state(S).");
    }
  }

  prog.optimization_rules = emit_optimization();
  return prog;
}

/// A ground term as printed by an ASP solver.
struct GroundTerm
{
  std::string name;  // function or constant name; empty for numbers
  std::optional<std::int64_t> number;
  std::vector<GroundTerm> args;
};

namespace detail {

class TermParser
{
public:
  explicit TermParser(std::string_view text) : s_(text) {}

  bool at_end()
  {
    skip_space();
    return i_ >= s_.size();
  }

  GroundTerm term()
  {
    skip_space();
    if (i_ < s_.size() && (s_[i_] == '-' || std::isdigit(static_cast<unsigned char>(s_[i_])))) {
      const auto start = i_;
      if (s_[i_] == '-')
        ++i_;
      if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_])))
        fail("expected a digit");
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
        ++i_;
      return GroundTerm{{}, std::stoll(std::string(s_.substr(start, i_ - start))), {}};
    }
    if (i_ >= s_.size() || !(std::islower(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
      fail("expected an atom");
    const auto start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '\''))
      ++i_;
    GroundTerm t{std::string(s_.substr(start, i_ - start)), std::nullopt, {}};
    if (i_ < s_.size() && s_[i_] == '(') {
      ++i_;
      t.args.push_back(term());
      while (i_ < s_.size() && s_[i_] == ',') {
        ++i_;
        t.args.push_back(term());
      }
      if (i_ >= s_.size() || s_[i_] != ')')
        fail("expected ')'");
      ++i_;
    }
    return t;
  }

  std::size_t position() const { return i_; }

  [[noreturn]] void fail(const std::string& what) const
  {
    throw AspError("malformed atom at offset " + std::to_string(i_) + ": " + what);
  }

private:
  void skip_space()
  {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

} // namespace detail

/// A solver model: its atoms, the schedule encoded by its `executed` atoms
/// and the value of its `utility` atom, if any.
struct AnswerSet
{
  std::vector<std::string> atoms;
  Schedule schedule;
  std::optional<Utility> reported_utility;
};

/// Parses one whitespace-separated list of ground atoms.
inline AnswerSet parse_answer_set(std::string_view line, const Domain& d)
{
  const NameMangler names(d.problem());
  detail::TermParser parser(line);
  AnswerSet out;
  std::vector<ScheduledAction> entries;
  while (!parser.at_end()) {
    const auto begin = parser.position();
    const auto atom = parser.term();
    out.atoms.emplace_back(line.substr(begin, parser.position() - begin));
    if (atom.number)
      parser.fail("a number is not an atom");
    if (atom.name == "executed") {
      if (atom.args.size() != 2 || !atom.args[1].number || atom.args[0].number || !atom.args[0].args.empty())
        throw AspError("malformed executed atom '" + out.atoms.back() + "'");
      auto original = names.unmangle(atom.args[0].name);
      if (!original || !d.action_id(*original))
        throw AspError("unknown action '" + atom.args[0].name + "'");
      entries.push_back({*atom.args[1].number, *original});
    } else if (atom.name == "utility") {
      if (atom.args.size() != 1 || !atom.args[0].number)
        throw AspError("malformed utility atom '" + out.atoms.back() + "'");
      out.reported_utility = *atom.args[0].number;
    }
  }
  out.schedule = Schedule(std::move(entries));
  return out;
}

/// Reads every model line of solver output. Lines not starting with a
/// lower-case atom (banners, "Answer: 1", "Optimization: ...") are skipped,
/// as is the solver's version banner.
inline std::vector<AnswerSet> read_answer_sets(std::string_view text, const Domain& d)
{
  std::vector<AnswerSet> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || !std::islower(static_cast<unsigned char>(line[first])))
      continue;
    // "clingo version 5.x", "pyclingo version 5.x", ...
    std::istringstream words(line);
    std::string w1, w2;
    words >> w1 >> w2;
    if (w2 == "version" && w1.find('(') == std::string::npos)
      continue;
    out.push_back(parse_answer_set(line, d));
  }
  return out;
}

struct CheckReport
{
  bool valid = false;
  std::optional<std::string> fault;  // why the schedule is not a plan
  std::optional<Utility> native_utility;
  std::optional<Utility> reported_utility;
  bool utility_match = false;  // true when no utility was reported
  std::optional<PlanReport> plan;

  bool ok() const { return valid && utility_match; }

  std::vector<std::string> findings() const
  {
    std::vector<std::string> out;
    out.push_back(valid ? "valid plan" : "invalid plan: " + fault.value_or("?"));
    if (valid && reported_utility && !utility_match)
      out.push_back("utility mismatch: native " + std::to_string(*native_utility) + ", reported " +
                    std::to_string(*reported_utility));
    return out;
  }
};

/// Re-executes the schedule of a model natively and compares utilities.
inline CheckReport cross_check(const Domain& d, Time horizon, const AnswerSet& ans, SearchConfig cfg)
{
  cfg.horizon = horizon;
  CheckReport report;
  report.reported_utility = ans.reported_utility;
  auto r = evaluate_schedule(d, ans.schedule, cfg);
  if (auto* rej = std::get_if<Rejection>(&r)) {
    report.fault = rej->describe();
    return report;
  }
  auto& plan = std::get<PlanReport>(r);
  report.valid = true;
  report.native_utility = plan.utility;
  report.utility_match = !ans.reported_utility || *ans.reported_utility == plan.utility;
  report.plan = std::move(plan);
  return report;
}

} // namespace nplan
