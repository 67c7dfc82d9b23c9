#pragma once

// Indexed form of a validated Problem. Fluents become bit positions, actions
// are ordered by name so that every downstream enumeration is canonical.

#include <nplan/model.hpp>

#include <boost/dynamic_bitset.hpp>

#include <optional>
#include <unordered_map>

namespace nplan {

using FluentBits = boost::dynamic_bitset<>;
using FluentId = std::size_t;
using ActionId = std::size_t;
using GoalId = std::size_t;
using NormId = std::size_t;

struct CompiledLiterals
{
  FluentBits positive;
  FluentBits negative;

  /// s |= L: every positive member holds and no negative member does.
  bool holds_in(const FluentBits& state) const
  {
    return positive.is_subset_of(state) && !negative.intersects(state);
  }
};

struct ActionInfo
{
  std::string name;
  CompiledLiterals pre;
  CompiledLiterals post;
  Time duration;
};

struct GoalInfo
{
  std::string name;
  CompiledLiterals requirements;
  Utility value;
};

struct NormInfo
{
  std::string name;
  NormKind kind;
  ActionId condition;
  ActionId subject;
  Time deadline;
  Utility cost;
};

class Domain
{
public:
  /// Throws ProblemError if `p` has validation errors.
  explicit Domain(Problem p) : problem_(std::move(p))
  {
    require_valid(problem_);

    std::vector<std::string> fl = problem_.fluents;
    std::sort(fl.begin(), fl.end());
    for (std::size_t i = 0; i < fl.size(); ++i)
      fluent_ids_.emplace(fl[i], i);
    fluent_names_ = std::move(fl);

    initial_ = FluentBits(fluent_names_.size());
    for (const auto& f : problem_.initial)
      initial_.set(fluent_ids_.at(f));

    std::vector<const DurativeAction*> acts;
    for (const auto& a : problem_.actions)
      acts.push_back(&a);
    std::sort(acts.begin(), acts.end(), [](auto* x, auto* y) { return x->name < y->name; });
    for (auto* a : acts) {
      action_ids_.emplace(a->name, actions_.size());
      actions_.push_back({a->name, compile(a->pre), compile(a->post), a->duration});
    }

    std::vector<const Goal*> gs;
    for (const auto& g : problem_.goals)
      gs.push_back(&g);
    std::sort(gs.begin(), gs.end(), [](auto* x, auto* y) { return x->name < y->name; });
    for (auto* g : gs)
      goals_.push_back({g->name, compile(g->requirements), g->value});

    std::vector<const Norm*> ns;
    for (const auto& n : problem_.norms)
      ns.push_back(&n);
    std::sort(ns.begin(), ns.end(), [](auto* x, auto* y) { return x->name < y->name; });
    for (auto* n : ns)
      norms_.push_back({n->name, n->kind, action_ids_.at(n->condition), action_ids_.at(n->subject), n->deadline,
                        n->cost});

    const auto na = actions_.size();
    conflicts_.assign(na * na, false);
    for (ActionId i = 0; i < na; ++i)
      for (ActionId j = 0; j < na; ++j)
        conflicts_[i * na + j] = contradicts(actions_[i], actions_[j]) || contradicts(actions_[j], actions_[i]);

    norms_by_condition_.resize(na);
    for (NormId n = 0; n < norms_.size(); ++n)
      norms_by_condition_[norms_[n].condition].push_back(n);
  }

  const Problem& problem() const { return problem_; }

  std::size_t fluent_count() const { return fluent_names_.size(); }
  const std::string& fluent_name(FluentId id) const { return fluent_names_.at(id); }
  std::optional<FluentId> fluent_id(std::string_view name) const
  {
    auto it = fluent_ids_.find(std::string(name));
    return it == fluent_ids_.end() ? std::nullopt : std::optional(it->second);
  }

  const FluentBits& initial_state() const { return initial_; }

  const std::vector<ActionInfo>& actions() const { return actions_; }
  const ActionInfo& action(ActionId id) const { return actions_.at(id); }
  std::optional<ActionId> action_id(std::string_view name) const
  {
    auto it = action_ids_.find(std::string(name));
    return it == action_ids_.end() ? std::nullopt : std::optional(it->second);
  }

  const std::vector<GoalInfo>& goals() const { return goals_; }
  const std::vector<NormInfo>& norms() const { return norms_; }
  const std::vector<NormId>& norms_conditioned_on(ActionId a) const { return norms_by_condition_[a]; }

  /// Membership in the symmetric concurrency-conflict relation; (a, a) possible.
  bool conflicting(ActionId a, ActionId b) const { return conflicts_[a * actions_.size() + b]; }

  std::vector<std::string> names_of(const FluentBits& bits) const
  {
    std::vector<std::string> out;
    for (auto i = bits.find_first(); i != FluentBits::npos; i = bits.find_next(i))
      out.push_back(fluent_names_[i]);
    return out;
  }

private:
  CompiledLiterals compile(const LiteralSet& set) const
  {
    CompiledLiterals out{FluentBits(fluent_names_.size()), FluentBits(fluent_names_.size())};
    for (const auto& l : set)
      (l.positive ? out.positive : out.negative).set(fluent_ids_.at(l.fluent));
    return out;
  }

  // Some fluent is asserted by a (pre or add effect) and denied by b (pre or delete effect).
  static bool contradicts(const ActionInfo& a, const ActionInfo& b)
  {
    return ((a.pre.positive | a.post.positive) & (b.pre.negative | b.post.negative)).any();
  }

  Problem problem_;
  std::vector<std::string> fluent_names_;
  std::unordered_map<std::string, FluentId> fluent_ids_;
  FluentBits initial_;
  std::vector<ActionInfo> actions_;
  std::unordered_map<std::string, ActionId> action_ids_;
  std::vector<GoalInfo> goals_;
  std::vector<NormInfo> norms_;
  std::vector<bool> conflicts_;
  std::vector<std::vector<NormId>> norms_by_condition_;
};

} // namespace nplan
