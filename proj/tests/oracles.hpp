#pragma once

// Independent reference implementations used to check the library, plus a
// random problem generator. Nothing here calls into the code under test
// beyond the plain data types.

#include <nplan/model.hpp>

#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using nplan::DurativeAction;
using nplan::Problem;

namespace detail {

inline std::vector<std::string> with_sign(const nplan::LiteralSet& s, bool positive)
{
  std::vector<std::string> out;
  for (const auto& text : s.to_strings()) {
    const bool neg = !text.empty() && text[0] == '!';
    if (neg != positive)
      out.push_back(neg ? text.substr(1) : text);
  }
  return out;
}

inline bool meet(const std::vector<std::string>& xs, const std::vector<std::string>& ys)
{
  for (const auto& x : xs)
    for (const auto& y : ys)
      if (x == y)
        return true;
  return false;
}

} // namespace detail

/// Concurrency conflict, clause by clause: some r in pr(a) or ps(a)+ whose
/// negation is in pr(b) or ps(b)-, or the same with a and b swapped.
inline bool conflict(const DurativeAction& a, const DurativeAction& b)
{
  using detail::meet;
  using detail::with_sign;
  auto one_way = [](const DurativeAction& x, const DurativeAction& y) {
    const auto x_pre_pos = with_sign(x.pre, true), x_post_pos = with_sign(x.post, true);
    const auto y_pre_neg = with_sign(y.pre, false), y_post_neg = with_sign(y.post, false);
    return meet(x_pre_pos, y_pre_neg) || meet(x_pre_pos, y_post_neg) || meet(x_post_pos, y_pre_neg) ||
           meet(x_post_pos, y_post_neg);
  };
  return one_way(a, b) || one_way(b, a);
}

/// Half-open intervals [s1, e1) and [s2, e2) share a time point.
inline bool overlap(std::int64_t s1, std::int64_t e1, std::int64_t s2, std::int64_t e2)
{
  for (auto k = s1; k < e1; ++k)
    if (s2 <= k && k < e2)
      return true;
  return false;
}

struct GeneratorLimits
{
  int max_fluents = 5;
  int max_actions = 3;
  int max_duration = 3;
  int max_goals = 2;
  int max_norms = 2;
  int max_deadline = 4;
};

/// Random literal set over f0..f{n-1}, never containing both polarities.
inline nplan::LiteralSet random_literals(std::mt19937& rng, int fluents, int max_size)
{
  std::uniform_int_distribution<int> size(0, max_size), pick(0, fluents - 1), coin(0, 1);
  std::vector<std::string> out;
  std::set<int> used;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) {
    const int f = pick(rng);
    if (!used.insert(f).second)
      continue;
    out.push_back((coin(rng) ? "" : "!") + ("f" + std::to_string(f)));
  }
  return nplan::LiteralSet::from_strings(out);
}

inline Problem random_problem(std::mt19937& rng, const GeneratorLimits& lim = {})
{
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Problem p;
  p.name = "random";
  const int nf = uniform(1, lim.max_fluents);
  for (int i = 0; i < nf; ++i) {
    p.fluents.push_back("f" + std::to_string(i));
    if (uniform(0, 2) == 0)
      p.initial.push_back(p.fluents.back());
  }
  const int na = uniform(1, lim.max_actions);
  for (int i = 0; i < na; ++i)
    p.actions.push_back({"a" + std::to_string(i), random_literals(rng, nf, 2), random_literals(rng, nf, 2),
                         uniform(1, lim.max_duration)});
  const int ng = uniform(1, lim.max_goals);
  for (int i = 0; i < ng; ++i) {
    auto req = random_literals(rng, nf, 2);
    if (req.empty())
      req = nplan::LiteralSet::from_strings({"f" + std::to_string(uniform(0, nf - 1))});
    p.goals.push_back({"g" + std::to_string(i), req, uniform(1, 30)});
  }
  const int nn = uniform(0, lim.max_norms);
  for (int i = 0; i < nn; ++i) {
    nplan::Norm n;
    n.name = "n" + std::to_string(i);
    n.kind = uniform(0, 1) ? nplan::NormKind::obligation : nplan::NormKind::prohibition;
    n.condition = "a" + std::to_string(uniform(0, na - 1));
    n.subject = "a" + std::to_string(uniform(0, na - 1));
    n.deadline = uniform(0, lim.max_deadline);
    n.cost = uniform(1, 20);
    p.norms.push_back(n);
  }
  return p;
}

/// A random schedule with distinct start times in [0, horizon).
inline std::vector<std::pair<std::int64_t, std::string>> random_entries(std::mt19937& rng, const Problem& p,
                                                                         std::int64_t horizon)
{
  std::vector<std::pair<std::int64_t, std::string>> out;
  std::uniform_int_distribution<std::size_t> pick(0, p.actions.size());
  for (std::int64_t t = 0; t < horizon; ++t) {
    const auto c = pick(rng);
    if (c < p.actions.size())
      out.emplace_back(t, p.actions[c].name);
  }
  return out;
}

struct InstanceOutcome
{
  std::string status;  // "complied", "violated" or "pending"
  std::int64_t at = 0;
};

/// Decides one norm activation by scanning every time point of the window.
/// `subject_starts` holds the start times of the subject action.
inline InstanceOutcome decide(bool obligation, std::int64_t window_begin, std::int64_t deadline,
                              const std::set<std::int64_t>& subject_starts, std::int64_t subject_duration,
                              bool start_and_end, std::int64_t horizon)
{
  for (auto t = window_begin; t < deadline; ++t) {
    if (!subject_starts.count(t))
      continue;
    // start_and_end: every point of [t, t + d] must lie in [window_begin, deadline)
    bool inside = true;
    if (start_and_end)
      for (auto k = t; k <= t + subject_duration; ++k)
        inside = inside && k < deadline;
    if (inside)
      return {obligation ? "complied" : "violated", t};
  }
  if (deadline <= horizon)
    return {obligation ? "violated" : "complied", deadline};
  return {"pending", 0};
}

} // namespace oracle
