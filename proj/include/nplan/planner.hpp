#pragma once

// Plan enumeration and utility-optimal plan search.
//
// The search walks time points 0..q. At each point it first applies the
// effects of actions ending there, re-checks the preconditions of actions
// still running, activates and expires norm instances and records satisfied
// goals; then it chooses at most one action to start. Branches die as soon as
// a precondition fails or a conflicting pair would overlap.

#include <nplan/semantics.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace nplan {

struct SearchConfig
{
  Time horizon = 1;
  ComplianceMode mode = ComplianceMode::start_only;
  PendingPolicy pending = PendingPolicy::ignore;
  std::optional<std::size_t> max_plans;
  std::optional<std::chrono::duration<double>> time_budget;

  // optimal_plans strategy. With `memoize` the search caches the exact best
  // future utility per search node and uses it as the bound; otherwise, with
  // `prune`, the bound is the current utility plus the value of every goal not
  // yet satisfied. With neither, the whole plan space is scored.
  bool prune = true;
  bool memoize = true;
};

/// A plan with its goals, resolved and pending norm instances, and utility.
struct PlanReport
{
  Schedule schedule;
  std::set<std::string> satisfied;
  std::vector<NormInstance> complied;
  std::vector<NormInstance> violated;
  std::vector<NormInstance> pending;
  Utility utility = 0;
  Time makespan = 0;

  bool operator==(const PlanReport&) const = default;
};

/// Why a schedule is not a plan: an execution fault, or no goal satisfied.
struct Rejection
{
  std::optional<SimulationFault> fault;

  std::string describe() const { return fault ? fault->describe() : "NoGoalSatisfied"; }
};

/// Scores a schedule directly through the semantics functions.
inline std::variant<PlanReport, Rejection> evaluate_schedule(const Domain& d, const Schedule& s,
                                                             const SearchConfig& cfg)
{
  auto sim = try_simulate(d, s, cfg.horizon);
  if (auto* f = std::get_if<SimulationFault>(&sim))
    return Rejection{*f};
  const auto& trace = std::get<Trace>(sim);

  PlanReport r;
  r.schedule = s;
  r.satisfied = satisfied_goals(trace, d);
  if (r.satisfied.empty())
    return Rejection{};

  auto instances = resolve_norms(d, s, instantiate_norms(d, s), cfg.mode, cfg.horizon);
  std::sort(instances.begin(), instances.end());
  r.utility = utility(d, r.satisfied, instances, cfg.pending);
  for (auto& inst : instances) {
    switch (inst.status) {
    case NormStatus::complied: r.complied.push_back(std::move(inst)); break;
    case NormStatus::violated: r.violated.push_back(std::move(inst)); break;
    case NormStatus::pending: r.pending.push_back(std::move(inst)); break;
    }
  }
  r.makespan = makespan(s, d);
  return r;
}

struct EnumerationResult
{
  std::size_t plans = 0;
  bool complete = true;          // false if stopped by max_plans, budget or visitor
  bool budget_exhausted = false;
};

struct OptimalResult
{
  std::optional<Utility> max_utility;  // empty iff no plan was found
  std::vector<PlanReport> plans;       // sorted by schedule
  bool certified = true;               // false if the time budget ran out
  std::size_t nodes = 0;
};

namespace detail {

struct Running
{
  ActionId action;
  Time start;
  Time end;
};

struct LiveInstance
{
  NormId norm;
  Time activation;
  Time activation_end;
  Time deadline;
};

struct ResolvedInstance
{
  LiveInstance instance;
  NormStatus status;
  Time at;
};

struct SearchNode
{
  Time time = 0;
  FluentBits state;
  std::vector<Running> running;
  std::vector<LiveInstance> live;
  boost::dynamic_bitset<> satisfied;
};

/// Per-branch history, grown and truncated as the search descends and returns.
struct SearchPath
{
  std::vector<std::pair<ActionId, Time>> entries;
  std::vector<ResolvedInstance> resolved;
  Utility value = 0;
  Utility cost = 0;

  struct Mark
  {
    std::size_t entries, resolved;
    Utility value, cost;
  };

  Mark mark() const { return {entries.size(), resolved.size(), value, cost}; }

  void restore(const Mark& m)
  {
    entries.resize(m.entries);
    resolved.resize(m.resolved);
    value = m.value;
    cost = m.cost;
  }

  Utility utility() const { return value - cost; }
};

class SearchEngine
{
public:
  static constexpr ActionId no_action = static_cast<ActionId>(-1);

  SearchEngine(const Domain& d, const SearchConfig& cfg) : d_(d), cfg_(cfg)
  {
    if (cfg.horizon < 0)
      throw std::invalid_argument("horizon must be non-negative");
    if (cfg.time_budget)
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(*cfg.time_budget);
  }

  Time horizon() const { return cfg_.horizon; }
  std::size_t nodes() const { return nodes_; }
  bool budget_exhausted() const { return budget_hit_; }

  /// Counts a node and polls the time budget.
  bool tick()
  {
    ++nodes_;
    if (deadline_ && (nodes_ & 0xfff) == 0 && std::chrono::steady_clock::now() > *deadline_)
      budget_hit_ = true;
    return !budget_hit_;
  }

  SearchNode root(SearchPath& path) const
  {
    SearchNode n;
    n.time = 0;
    n.state = d_.initial_state();
    n.satisfied.resize(d_.goals().size());
    enter(n, path);
    return n;
  }

  /// Choices at a time point, in canonical order: actions by name, then idle.
  std::vector<ActionId> choices() const
  {
    std::vector<ActionId> out;
    for (ActionId a = 0; a < d_.actions().size(); ++a)
      out.push_back(a);
    out.push_back(no_action);
    return out;
  }

  /// Applies `choice` at node.time and advances to the next time point.
  /// Returns false (leaving `child` unspecified) if the branch dies.
  bool step(const SearchNode& node, ActionId choice, SearchNode& child, SearchPath& path) const
  {
    child = node;
    if (choice != no_action && !try_start(child, path, choice))
      return false;
    ++child.time;
    return enter(child, path);
  }

  bool is_leaf(const SearchNode& n) const { return n.time == cfg_.horizon; }
  bool leaf_valid(const SearchNode& n) const { return n.satisfied.any(); }

  /// Utility change charged at the horizon for instances still pending.
  Utility leaf_gain(const SearchNode& n) const
  {
    if (cfg_.pending != PendingPolicy::violate)
      return 0;
    Utility g = 0;
    for (const auto& l : n.live)
      g -= d_.norms()[l.norm].cost;
    return g;
  }

  /// Current utility plus the value of every goal not yet satisfied.
  Utility optimistic_bound(const SearchNode& n, const SearchPath& path) const
  {
    Utility b = path.utility();
    for (GoalId g = 0; g < d_.goals().size(); ++g)
      if (!n.satisfied.test(g))
        b += d_.goals()[g].value;
    return b;
  }

  PlanReport report(const SearchNode& leaf, const SearchPath& path) const
  {
    PlanReport r;
    std::vector<ScheduledAction> entries;
    entries.reserve(path.entries.size());
    for (auto [a, t] : path.entries) {
      entries.push_back({t, d_.action(a).name});
      r.makespan = std::max(r.makespan, t + d_.action(a).duration);
    }
    r.schedule = Schedule(std::move(entries));
    for (GoalId g = 0; g < d_.goals().size(); ++g)
      if (leaf.satisfied.test(g))
        r.satisfied.insert(d_.goals()[g].name);
    auto to_instance = [&](const LiveInstance& l, NormStatus st, Time at) {
      return NormInstance{d_.norms()[l.norm].name, l.activation, l.activation_end, l.deadline, st, at};
    };
    for (const auto& res : path.resolved)
      (res.status == NormStatus::complied ? r.complied : r.violated)
        .push_back(to_instance(res.instance, res.status, res.at));
    for (const auto& l : leaf.live)
      r.pending.push_back(to_instance(l, NormStatus::pending, 0));
    std::sort(r.complied.begin(), r.complied.end());
    std::sort(r.violated.begin(), r.violated.end());
    std::sort(r.pending.begin(), r.pending.end());
    r.utility = path.utility() + leaf_gain(leaf);
    return r;
  }

  /// Everything that determines the future of a node, as a hashable string.
  std::string key(const SearchNode& n) const
  {
    std::vector<std::int64_t> words;
    words.push_back(n.time);
    append_bits(words, n.state);
    std::vector<std::pair<ActionId, Time>> run;
    for (const auto& r : n.running)
      run.emplace_back(r.action, r.end);
    std::sort(run.begin(), run.end());
    words.push_back(static_cast<std::int64_t>(run.size()));
    for (auto [a, e] : run) {
      words.push_back(static_cast<std::int64_t>(a));
      words.push_back(e);
    }
    std::vector<std::pair<NormId, Time>> live;
    for (const auto& l : n.live)
      live.emplace_back(l.norm, l.deadline);
    std::sort(live.begin(), live.end());
    words.push_back(static_cast<std::int64_t>(live.size()));
    for (auto [id, dl] : live) {
      words.push_back(static_cast<std::int64_t>(id));
      words.push_back(dl);
    }
    append_bits(words, n.satisfied);
    return std::string(reinterpret_cast<const char*>(words.data()), words.size() * sizeof(std::int64_t));
  }

private:
  static void append_bits(std::vector<std::int64_t>& words, const boost::dynamic_bitset<>& bits)
  {
    std::vector<boost::dynamic_bitset<>::block_type> blocks(bits.num_blocks());
    boost::to_block_range(bits, blocks.begin());
    for (auto b : blocks)
      words.push_back(static_cast<std::int64_t>(b));
  }

  /// Processes time point n.time: effects of ending actions, invariant
  /// preconditions of running actions, norm activation and expiry, goals.
  bool enter(SearchNode& n, SearchPath& path) const
  {
    const Time k = n.time;
    std::vector<Running> ended;
    if (!n.running.empty()) {
      FluentBits added(d_.fluent_count()), deleted(d_.fluent_count());
      auto it = std::stable_partition(n.running.begin(), n.running.end(), [k](const Running& r) { return r.end != k; });
      for (auto e = it; e != n.running.end(); ++e) {
        added |= d_.action(e->action).post.positive;
        deleted |= d_.action(e->action).post.negative;
        ended.push_back(*e);
      }
      n.running.erase(it, n.running.end());
      if (!ended.empty()) {
        n.state -= deleted;
        n.state |= added;
      }
      for (const auto& r : n.running)
        if (!d_.action(r.action).pre.holds_in(n.state))
          return false;
    }

    for (const auto& e : ended)
      for (NormId id : d_.norms_conditioned_on(e.action))
        n.live.push_back({id, e.start, k, k + d_.norms()[id].deadline});

    for (std::size_t i = 0; i < n.live.size();) {
      if (n.live[i].deadline == k) {
        const auto& norm = d_.norms()[n.live[i].norm];
        const bool violated = norm.kind == NormKind::obligation;
        path.resolved.push_back({n.live[i], violated ? NormStatus::violated : NormStatus::complied, k});
        if (violated)
          path.cost += norm.cost;
        n.live.erase(n.live.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }

    for (GoalId g = 0; g < d_.goals().size(); ++g) {
      if (!n.satisfied.test(g) && d_.goals()[g].requirements.holds_in(n.state)) {
        n.satisfied.set(g);
        path.value += d_.goals()[g].value;
      }
    }
    return true;
  }

  bool try_start(SearchNode& n, SearchPath& path, ActionId a) const
  {
    const Time k = n.time;
    const auto& act = d_.action(a);
    if (k + act.duration > cfg_.horizon || !act.pre.holds_in(n.state))
      return false;
    for (const auto& r : n.running)
      if (d_.conflicting(r.action, a))
        return false;

    path.entries.emplace_back(a, k);
    n.running.push_back({a, k, k + act.duration});

    for (std::size_t i = 0; i < n.live.size();) {
      const auto& inst = n.live[i];
      const auto& norm = d_.norms()[inst.norm];
      const bool qualifies =
        norm.subject == a && (cfg_.mode == ComplianceMode::start_only || k + act.duration < inst.deadline);
      if (!qualifies) {
        ++i;
        continue;
      }
      const bool violated = norm.kind == NormKind::prohibition;
      path.resolved.push_back({inst, violated ? NormStatus::violated : NormStatus::complied, k});
      if (violated)
        path.cost += norm.cost;
      n.live.erase(n.live.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return true;
  }

  const Domain& d_;
  const SearchConfig& cfg_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::size_t nodes_ = 0;
  bool budget_hit_ = false;
};

class PlanCollector
{
public:
  void offer(Utility u, const std::function<PlanReport()>& make)
  {
    if (best_ && u < *best_)
      return;
    if (!best_ || u > *best_) {
      best_ = u;
      plans_.clear();
    }
    plans_.push_back(make());
  }

  const std::optional<Utility>& best() const { return best_; }

  OptimalResult finish(bool certified, std::size_t nodes)
  {
    std::sort(plans_.begin(), plans_.end(), [](const PlanReport& a, const PlanReport& b) { return a.schedule < b.schedule; });
    return {best_, std::move(plans_), certified, nodes};
  }

private:
  std::optional<Utility> best_;
  std::vector<PlanReport> plans_;
};

/// Branch and bound over the plan space, optionally with the goal-value bound.
class BoundedSearch
{
public:
  BoundedSearch(const Domain& d, const SearchConfig& cfg) : engine_(d, cfg), cfg_(cfg) {}

  OptimalResult run()
  {
    SearchPath path;
    auto root = engine_.root(path);
    visit(root, path);
    return out_.finish(!engine_.budget_exhausted(), engine_.nodes());
  }

private:
  void visit(const SearchNode& n, SearchPath& path)
  {
    if (!engine_.tick())
      return;
    if (engine_.is_leaf(n)) {
      if (engine_.leaf_valid(n))
        out_.offer(path.utility() + engine_.leaf_gain(n), [&] { return engine_.report(n, path); });
      return;
    }
    if (cfg_.prune && out_.best() && engine_.optimistic_bound(n, path) < *out_.best())
      return;
    SearchNode child;
    for (ActionId c : engine_.choices()) {
      const auto m = path.mark();
      if (engine_.step(n, c, child, path))
        visit(child, path);
      path.restore(m);
    }
  }

  SearchEngine engine_;
  const SearchConfig& cfg_;
  PlanCollector out_;
};

/// Exact best utility still obtainable below a search node, memoized by node
/// key. Empty means no plan can be completed from the node.
class FutureBound
{
public:
  using LeafHook = std::function<void(const SearchNode&, const SearchPath&)>;

  explicit FutureBound(SearchEngine& engine, LeafHook on_leaf = {}) : engine_(engine), on_leaf_(std::move(on_leaf)) {}

  std::optional<Utility> operator()(const SearchNode& n, SearchPath& path)
  {
    if (engine_.is_leaf(n)) {
      if (!engine_.leaf_valid(n))
        return std::nullopt;
      if (on_leaf_)
        on_leaf_(n, path);
      return engine_.leaf_gain(n);
    }
    auto k = engine_.key(n);
    if (auto it = memo_.find(k); it != memo_.end())
      return it->second == dead ? std::nullopt : std::optional(it->second);
    if (!engine_.tick())
      return std::nullopt;

    std::optional<Utility> result;
    SearchNode child;
    for (ActionId c : engine_.choices()) {
      const auto m = path.mark();
      const Utility base = path.utility();
      if (engine_.step(n, c, child, path)) {
        const Utility gain = path.utility() - base;
        if (auto sub = (*this)(child, path); sub && (!result || gain + *sub > *result))
          result = gain + *sub;
      }
      path.restore(m);
      if (engine_.budget_exhausted())
        return std::nullopt;
    }
    memo_.emplace(std::move(k), result ? *result : dead);
    return result;
  }

private:
  static constexpr Utility dead = std::numeric_limits<Utility>::min();

  SearchEngine& engine_;
  LeafHook on_leaf_;
  std::unordered_map<std::string, Utility> memo_;
};

/// Optimal plans read off the exact bound: descend only into children whose
/// bound still reaches the optimum. Leaves met while computing the bound feed
/// a best-so-far set, returned uncertified if the budget runs out.
class MemoSearch
{
public:
  MemoSearch(const Domain& d, const SearchConfig& cfg)
    : engine_(d, cfg), bound_(engine_, [this](const SearchNode& n, const SearchPath& p) {
        fallback_.offer(p.utility() + engine_.leaf_gain(n), [&] { return engine_.report(n, p); });
      })
  {
  }

  OptimalResult run()
  {
    SearchPath path;
    auto root = engine_.root(path);
    const auto best = bound_(root, path);
    if (engine_.budget_exhausted())
      return fallback_.finish(false, engine_.nodes());

    PlanCollector out;
    if (best)
      collect(root, path, *best, out);
    return out.finish(true, engine_.nodes());
  }

private:
  void collect(const SearchNode& n, SearchPath& path, Utility remaining, PlanCollector& out)
  {
    if (engine_.is_leaf(n)) {
      if (engine_.leaf_valid(n) && engine_.leaf_gain(n) == remaining)
        out.offer(path.utility() + engine_.leaf_gain(n), [&] { return engine_.report(n, path); });
      return;
    }
    SearchNode child;
    for (ActionId c : engine_.choices()) {
      const auto m = path.mark();
      const Utility base = path.utility();
      if (engine_.step(n, c, child, path)) {
        const Utility gain = path.utility() - base;
        if (auto sub = bound_(child, path); sub && gain + *sub == remaining)
          collect(child, path, remaining - gain, out);
      }
      path.restore(m);
    }
  }

  SearchEngine engine_;
  PlanCollector fallback_;
  FutureBound bound_;
};

/// Every utility obtainable below a node, memoized by node key.
class UtilitySets
{
public:
  explicit UtilitySets(SearchEngine& engine) : engine_(engine) {}

  const std::set<Utility>& operator()(const SearchNode& n, SearchPath& path)
  {
    static const std::set<Utility> none;
    if (engine_.is_leaf(n)) {
      leaf_ = engine_.leaf_valid(n) ? std::set<Utility>{engine_.leaf_gain(n)} : none;
      return leaf_;
    }
    auto k = engine_.key(n);
    if (auto it = memo_.find(k); it != memo_.end())
      return it->second;
    engine_.tick();

    std::set<Utility> result;
    SearchNode child;
    for (ActionId c : engine_.choices()) {
      const auto m = path.mark();
      const Utility base = path.utility();
      if (engine_.step(n, c, child, path)) {
        const Utility gain = path.utility() - base;
        for (Utility u : (*this)(child, path))
          result.insert(gain + u);
      }
      path.restore(m);
    }
    return memo_.emplace(std::move(k), std::move(result)).first->second;
  }

private:
  SearchEngine& engine_;
  std::set<Utility> leaf_;
  std::unordered_map<std::string, std::set<Utility>> memo_;
};

} // namespace detail

/// Streams every plan up to the horizon to `visit`, in depth-first canonical
/// order (at each time point: actions by name, then idle). Returning false
/// from `visit` stops the enumeration. With cfg.memoize, subtrees that cannot
/// complete a plan (or cannot reach `min_utility`) are skipped using the
/// exact future bound; the yielded set is the same either way.
inline EnumerationResult enumerate_plans(const Domain& d, const SearchConfig& cfg,
                                         const std::function<bool(const PlanReport&)>& visit,
                                         std::optional<Utility> min_utility = std::nullopt)
{
  if (cfg.horizon < 1)
    return {};
  detail::SearchEngine engine(d, cfg);
  std::optional<detail::FutureBound> bound;
  if (cfg.memoize)
    bound.emplace(engine);
  EnumerationResult result;
  bool stopped = false;

  std::function<void(const detail::SearchNode&, detail::SearchPath&)> walk =
    [&](const detail::SearchNode& n, detail::SearchPath& path) {
      if (stopped || !engine.tick())
        return;
      if (engine.is_leaf(n)) {
        if (!engine.leaf_valid(n))
          return;
        auto report = engine.report(n, path);
        if (min_utility && report.utility < *min_utility)
          return;
        ++result.plans;
        if (!visit(report) || (cfg.max_plans && result.plans >= *cfg.max_plans))
          stopped = true;
        return;
      }
      detail::SearchNode child;
      for (ActionId c : engine.choices()) {
        const auto m = path.mark();
        if (engine.step(n, c, child, path)) {
          bool promising = true;
          if (bound) {
            const auto best = (*bound)(child, path);
            promising = best && (!min_utility || path.utility() + *best >= *min_utility);
          }
          if (promising)
            walk(child, path);
        }
        path.restore(m);
        if (stopped || engine.budget_exhausted())
          return;
      }
    };

  detail::SearchPath path;
  auto root = engine.root(path);
  walk(root, path);
  result.budget_exhausted = engine.budget_exhausted();
  result.complete = !stopped && !result.budget_exhausted;
  return result;
}

inline std::vector<PlanReport> collect_plans(const Domain& d, const SearchConfig& cfg,
                                             std::optional<Utility> min_utility = std::nullopt)
{
  std::vector<PlanReport> out;
  enumerate_plans(
    d, cfg,
    [&](const PlanReport& r) {
      out.push_back(r);
      return true;
    },
    min_utility);
  return out;
}

/// The set of utilities over all plans, computed without listing them.
inline std::set<Utility> achievable_utilities(const Domain& d, const SearchConfig& cfg)
{
  if (cfg.horizon < 1)
    return {};
  detail::SearchEngine engine(d, cfg);
  detail::UtilitySets sets(engine);
  detail::SearchPath path;
  auto root = engine.root(path);
  std::set<Utility> out;
  for (Utility u : sets(root, path))
    out.insert(path.utility() + u);
  return out;
}

/// Largest problem enumerate_naive accepts: (|A| + 1)^q assignments.
inline constexpr double naive_assignment_limit = 1e7;

/// Brute force: every assignment of at most one action start to each time
/// point, filtered through evaluate_schedule. Starts at q are never generated
/// since no action can finish there. Meant as a test oracle.
inline std::vector<PlanReport> enumerate_naive(const Domain& d, const SearchConfig& cfg)
{
  const auto choices = d.actions().size() + 1;
  if (std::pow(static_cast<double>(choices), static_cast<double>(cfg.horizon)) > naive_assignment_limit)
    throw std::length_error("enumerate_naive: (|A|+1)^q exceeds the enumeration limit");

  std::vector<PlanReport> out;
  if (cfg.horizon < 1)
    return out;
  std::vector<std::size_t> slot(static_cast<std::size_t>(std::max<Time>(cfg.horizon, 0)), 0);
  while (true) {
    std::vector<ScheduledAction> entries;
    for (std::size_t t = 0; t < slot.size(); ++t)
      if (slot[t] > 0)
        entries.push_back({static_cast<Time>(t), d.action(slot[t] - 1).name});
    auto r = evaluate_schedule(d, Schedule(std::move(entries)), cfg);
    if (auto* plan = std::get_if<PlanReport>(&r))
      out.push_back(std::move(*plan));

    std::size_t i = 0;
    while (i < slot.size() && ++slot[i] == choices)
      slot[i++] = 0;
    if (i == slot.size())
      break;
  }
  std::sort(out.begin(), out.end(), [](const PlanReport& a, const PlanReport& b) { return a.schedule < b.schedule; });
  return out;
}

/// All plans of maximal utility. A horizon below 1 admits no plan.
inline OptimalResult optimal_plans(const Domain& d, const SearchConfig& cfg)
{
  if (cfg.horizon < 1)
    return {};
  if (cfg.memoize)
    return detail::MemoSearch(d, cfg).run();
  return detail::BoundedSearch(d, cfg).run();
}

} // namespace nplan
