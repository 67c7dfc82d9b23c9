#pragma once

// Execution semantics of timed schedules: state traces, goal satisfaction and
// the lifecycle of norm instances (activation, compliance, violation).

#include <nplan/domain.hpp>

#include <variant>

namespace nplan {

/// One (action, start time) pair. Ordered by start time, then action name.
struct ScheduledAction
{
  Time start = 0;
  std::string action;

  auto operator<=>(const ScheduledAction&) const = default;
};

class Schedule
{
public:
  Schedule() = default;
  Schedule(std::initializer_list<ScheduledAction> entries) : entries_(entries) { sort(); }
  explicit Schedule(std::vector<ScheduledAction> entries) : entries_(std::move(entries)) { sort(); }

  const std::vector<ScheduledAction>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// (action, start) occurs in the schedule.
  bool contains(std::string_view action, Time start) const
  {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const ScheduledAction& e) { return e.start == start && e.action == action; });
  }

  auto operator<=>(const Schedule&) const = default;
  bool operator==(const Schedule&) const = default;

private:
  void sort() { std::sort(entries_.begin(), entries_.end()); }

  std::vector<ScheduledAction> entries_;
};

inline std::string to_string(const Schedule& s)
{
  std::string out = "<";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i)
      out += ", ";
    out += "(" + s.entries()[i].action + "," + std::to_string(s.entries()[i].start) + ")";
  }
  return out + ">";
}

enum class ComplianceMode { start_only, start_and_end };
enum class PendingPolicy { ignore, violate, comply };

inline std::string_view to_string(ComplianceMode m) { return m == ComplianceMode::start_only ? "start" : "start-end"; }

inline std::string_view to_string(PendingPolicy p)
{
  switch (p) {
  case PendingPolicy::ignore: return "ignore";
  case PendingPolicy::violate: return "violate";
  case PendingPolicy::comply: return "comply";
  }
  return "?";
}

enum class FaultKind { unknown_action, horizon_exceeded, same_start, conflict_overlap, precondition_failure };

/// Why a schedule cannot be executed. `first`/`second` name the actions
/// involved and `time` the earliest offending time point.
struct SimulationFault
{
  FaultKind kind;
  std::string first;
  std::string second;
  Time time = 0;

  bool operator==(const SimulationFault&) const = default;

  std::string describe() const
  {
    const auto t = std::to_string(time);
    switch (kind) {
    case FaultKind::unknown_action: return "UnknownAction(" + first + ")";
    case FaultKind::horizon_exceeded: return "HorizonExceeded(" + first + " ends at " + t + ")";
    case FaultKind::same_start: return "SameStart(" + first + ", " + second + ", " + t + ")";
    case FaultKind::conflict_overlap: return "ConflictOverlap(" + first + ", " + second + ", " + t + ")";
    case FaultKind::precondition_failure: return "PreconditionFailure(" + first + ", " + t + ")";
    }
    return "?";
  }
};

class SimulationError : public std::runtime_error
{
public:
  explicit SimulationError(SimulationFault f) : std::runtime_error(f.describe()), fault_(std::move(f)) {}
  const SimulationFault& fault() const noexcept { return fault_; }

private:
  SimulationFault fault_;
};

/// State sequence s_0..s_q plus which entries end at / are in progress at each k.
struct Trace
{
  Time horizon = 0;
  std::vector<FluentBits> states;
  std::vector<std::vector<ScheduledAction>> ending_at;
  std::vector<std::vector<ScheduledAction>> in_progress_at;
};

/// Pairs of conflicting action names, each stored as (smaller, larger).
using ActionPair = std::pair<std::string, std::string>;

inline std::set<ActionPair> conflicting_actions(const Domain& d)
{
  std::set<ActionPair> out;
  for (ActionId i = 0; i < d.actions().size(); ++i)
    for (ActionId j = i; j < d.actions().size(); ++j)
      if (d.conflicting(i, j))
        out.emplace(d.action(i).name, d.action(j).name);
  return out;
}

namespace detail {

struct ResolvedEntry
{
  ActionId action;
  Time start;
  Time end;
  const ScheduledAction* source;
};

inline std::variant<std::vector<ResolvedEntry>, SimulationFault> resolve_entries(const Domain& d, const Schedule& s)
{
  std::vector<ResolvedEntry> out;
  out.reserve(s.size());
  for (const auto& e : s) {
    auto id = d.action_id(e.action);
    if (!id)
      return SimulationFault{FaultKind::unknown_action, e.action, {}, e.start};
    out.push_back({*id, e.start, e.start + d.action(*id).duration, &e});
  }
  return out;
}

} // namespace detail

/// Latest end time over all entries; 0 for the empty schedule.
inline Time makespan(const Schedule& s, const Domain& d)
{
  Time m = 0;
  for (const auto& e : s) {
    auto id = d.action_id(e.action);
    if (!id)
      throw SimulationError({FaultKind::unknown_action, e.action, {}, e.start});
    m = std::max(m, e.start + d.action(*id).duration);
  }
  return m;
}

/// Executes `s` over time points 0..horizon. Structural faults (unknown
/// action, horizon, shared start, conflicting overlap) are reported before
/// precondition failures.
inline std::variant<Trace, SimulationFault> try_simulate(const Domain& d, const Schedule& s, Time horizon)
{
  auto resolved = detail::resolve_entries(d, s);
  if (auto* f = std::get_if<SimulationFault>(&resolved))
    return *f;
  const auto& entries = std::get<std::vector<detail::ResolvedEntry>>(resolved);

  for (const auto& e : entries) {
    if (e.start < 0 || e.end > horizon)
      return SimulationFault{FaultKind::horizon_exceeded, e.source->action, {}, e.end};
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].start == entries[i - 1].start)
      return SimulationFault{FaultKind::same_start, entries[i - 1].source->action, entries[i].source->action,
                             entries[i].start};
  }

  std::optional<SimulationFault> overlap;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const auto& a = entries[i];
      const auto& b = entries[j];
      // entries are sorted by start, so b overlaps a iff it starts before a ends
      if (b.start < a.end && d.conflicting(a.action, b.action) && (!overlap || b.start < overlap->time))
        overlap = SimulationFault{FaultKind::conflict_overlap, a.source->action, b.source->action, b.start};
    }
  }
  if (overlap)
    return *overlap;

  Trace t;
  t.horizon = horizon;
  t.states.reserve(static_cast<std::size_t>(horizon) + 1);
  t.ending_at.resize(static_cast<std::size_t>(horizon) + 1);
  t.in_progress_at.resize(static_cast<std::size_t>(horizon) + 1);
  t.states.push_back(d.initial_state());

  for (const auto& e : entries) {
    t.ending_at[static_cast<std::size_t>(e.end)].push_back(*e.source);
    for (Time k = e.start; k < e.end; ++k)
      t.in_progress_at[static_cast<std::size_t>(k)].push_back(*e.source);
  }

  for (Time k = 1; k <= horizon; ++k) {
    FluentBits next = t.states.back();
    FluentBits added(d.fluent_count()), deleted(d.fluent_count());
    for (const auto& e : entries) {
      if (e.end == k) {
        added |= d.action(e.action).post.positive;
        deleted |= d.action(e.action).post.negative;
      }
    }
    next -= deleted;
    next |= added;
    t.states.push_back(std::move(next));
  }

  for (Time k = 0; k <= horizon; ++k) {
    for (const auto& e : entries) {
      if (e.start <= k && k < e.end && !d.action(e.action).pre.holds_in(t.states[static_cast<std::size_t>(k)]))
        return SimulationFault{FaultKind::precondition_failure, e.source->action, {}, k};
    }
  }
  return t;
}

inline Trace simulate(const Domain& d, const Schedule& s, Time horizon)
{
  auto r = try_simulate(d, s, horizon);
  if (auto* f = std::get_if<SimulationFault>(&r))
    throw SimulationError(*f);
  return std::get<Trace>(std::move(r));
}

/// Goals whose requirements hold in at least one state of the trace.
inline std::set<std::string> satisfied_goals(const Trace& t, const Domain& d)
{
  std::set<std::string> out;
  for (const auto& g : d.goals()) {
    for (const auto& s : t.states) {
      if (g.requirements.holds_in(s)) {
        out.insert(g.name);
        break;
      }
    }
  }
  return out;
}

enum class NormStatus { pending, complied, violated };

inline std::string_view to_string(NormStatus s)
{
  switch (s) {
  case NormStatus::pending: return "pending";
  case NormStatus::complied: return "complied";
  case NormStatus::violated: return "violated";
  }
  return "?";
}

/// One activation of a norm. `deadline` is absolute: the relative deadline
/// plus the end time of the activating action.
struct NormInstance
{
  std::string norm;
  Time activation_time = 0;
  Time activation_end = 0;
  Time deadline = 0;
  NormStatus status = NormStatus::pending;
  Time resolved_at = 0;  // meaningful unless pending

  auto operator<=>(const NormInstance&) const = default;
  bool operator==(const NormInstance&) const = default;
};

/// One pending instance per (norm, execution of its condition action).
inline std::vector<NormInstance> instantiate_norms(const Domain& d, const Schedule& s)
{
  std::vector<NormInstance> out;
  for (const auto& n : d.norms()) {
    const auto& cond = d.action(n.condition);
    for (const auto& e : s) {
      if (e.action != cond.name)
        continue;
      const Time end = e.start + cond.duration;
      out.push_back({n.name, e.start, end, n.deadline + end, NormStatus::pending, 0});
    }
  }
  return out;
}

/// Decides each instance against the schedule. The compliance window is
/// [activation_end, deadline). In start_only mode a subject start inside the
/// window counts; in start_and_end mode the closed execution interval
/// [start, start + duration] must lie inside it.
inline std::vector<NormInstance> resolve_norms(const Domain& d, const Schedule& s, std::vector<NormInstance> instances,
                                               ComplianceMode mode, Time horizon)
{
  std::map<std::string, const NormInfo*> by_name;
  for (const auto& n : d.norms())
    by_name.emplace(n.name, &n);

  for (auto& inst : instances) {
    const NormInfo& n = *by_name.at(inst.norm);
    const auto& sub = d.action(n.subject);
    std::optional<Time> hit;
    for (const auto& e : s) {  // ascending start
      if (e.action != sub.name)
        continue;
      const bool in_window = e.start >= inst.activation_end &&
                             (mode == ComplianceMode::start_only ? e.start < inst.deadline
                                                                 : e.start + sub.duration < inst.deadline);
      if (in_window) {
        hit = e.start;
        break;
      }
    }
    if (hit) {
      inst.status = n.kind == NormKind::obligation ? NormStatus::complied : NormStatus::violated;
      inst.resolved_at = *hit;
    } else if (inst.deadline <= horizon) {
      inst.status = n.kind == NormKind::obligation ? NormStatus::violated : NormStatus::complied;
      inst.resolved_at = inst.deadline;
    } else {
      inst.status = NormStatus::pending;
      inst.resolved_at = 0;
    }
  }
  return instances;
}

/// Value of satisfied goals minus the cost of violated instances. Pending
/// instances cost nothing unless the policy treats them as violated.
inline Utility utility(const Domain& d, const std::set<std::string>& satisfied,
                       const std::vector<NormInstance>& instances, PendingPolicy pending = PendingPolicy::ignore)
{
  Utility u = 0;
  for (const auto& g : d.goals())
    if (satisfied.count(g.name))
      u += g.value;
  for (const auto& inst : instances) {
    const bool charged = inst.status == NormStatus::violated ||
                         (inst.status == NormStatus::pending && pending == PendingPolicy::violate);
    if (!charged)
      continue;
    for (const auto& n : d.norms())
      if (n.name == inst.norm)
        u -= n.cost;
  }
  return u;
}

} // namespace nplan
