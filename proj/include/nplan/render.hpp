#pragma once

// Human-readable timelines and JSON documents for plans and check reports.

#include <nplan/aspgen.hpp>
#include <nplan/problem_io.hpp>

#include <iomanip>

namespace nplan {

inline nlohmann::json to_json(const NormInstance& inst, const Domain& d)
{
  nlohmann::json j{{"norm", inst.norm},
                   {"activated_at", inst.activation_time},
                   {"activation_end", inst.activation_end},
                   {"deadline", inst.deadline},
                   {"status", std::string(to_string(inst.status))}};
  if (inst.status != NormStatus::pending)
    j["resolved_at"] = inst.resolved_at;
  for (const auto& n : d.norms())
    if (n.name == inst.norm)
      j["cost"] = n.cost;
  return j;
}

inline nlohmann::json to_json(const Schedule& s, const Domain& d)
{
  auto out = nlohmann::json::array();
  for (const auto& e : s) {
    nlohmann::json j{{"action", e.action}, {"start", e.start}};
    if (auto id = d.action_id(e.action))
      j["end"] = e.start + d.action(*id).duration;
    out.push_back(std::move(j));
  }
  return out;
}

inline nlohmann::json to_json(const PlanReport& r, const Domain& d)
{
  auto instances = [&](const std::vector<NormInstance>& v) {
    auto a = nlohmann::json::array();
    for (const auto& i : v)
      a.push_back(to_json(i, d));
    return a;
  };
  return {{"schedule", to_json(r.schedule, d)},
          {"satisfied", r.satisfied},
          {"complied", instances(r.complied)},
          {"violated", instances(r.violated)},
          {"pending", instances(r.pending)},
          {"utility", r.utility},
          {"makespan", r.makespan}};
}

/// Reads a schedule from `[{"action": .., "start": ..}, ..]` or from an
/// object carrying such a list under "schedule".
inline Schedule schedule_from_json(const nlohmann::json& j)
{
  const auto& list = j.is_object() && j.contains("schedule") ? j.at("schedule") : j;
  if (!list.is_array())
    throw std::runtime_error("expected a list of {action, start} entries");
  std::vector<ScheduledAction> entries;
  for (const auto& e : list) {
    if (!e.is_object() || !e.contains("action") || !e.contains("start") || !e.at("action").is_string() ||
        !e.at("start").is_number_integer())
      throw std::runtime_error("schedule entry must have a string 'action' and an integer 'start'");
    entries.push_back({e.at("start").get<Time>(), e.at("action").get<std::string>()});
  }
  return Schedule(std::move(entries));
}

/// One row per time point: fluents added (+) and removed (-), actions
/// starting and running, goals first satisfied, norm outcomes.
inline std::string render_timeline(const Domain& d, const PlanReport& r, Time horizon)
{
  const auto trace = simulate(d, r.schedule, horizon);
  std::ostringstream out;
  out << "plan " << to_string(r.schedule) << "\n";
  out << "  utility " << r.utility << ", makespan " << r.makespan << "\n";

  out << "  initial:";
  for (const auto& f : d.names_of(trace.states.front()))
    out << " " << f;
  out << "\n";

  std::set<std::string> seen_goals;
  for (Time k = 0; k <= horizon; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    std::vector<std::string> cells;
    if (k > 0) {
      const auto& prev = trace.states[idx - 1];
      const auto& cur = trace.states[idx];
      for (const auto& f : d.names_of(cur - prev))
        cells.push_back("+" + f);
      for (const auto& f : d.names_of(prev - cur))
        cells.push_back("-" + f);
    }
    for (const auto& e : r.schedule)
      if (e.start == k)
        cells.push_back("start " + e.action);
    std::vector<std::string> running;
    for (const auto& e : trace.in_progress_at[idx])
      if (e.start != k)
        running.push_back(e.action);
    if (!running.empty())
      cells.push_back("running " + detail::join(running, ","));
    for (const auto& g : d.goals())
      if (!seen_goals.count(g.name) && g.requirements.holds_in(trace.states[idx])) {
        seen_goals.insert(g.name);
        cells.push_back("goal " + g.name);
      }
    for (const auto& inst : r.violated)
      if (inst.resolved_at == k)
        cells.push_back("violated " + inst.norm);
    for (const auto& inst : r.complied)
      if (inst.resolved_at == k)
        cells.push_back("complied " + inst.norm);
    if (cells.empty())
      continue;
    out << "  " << std::setw(3) << k << " | " << detail::join(cells, "  ") << "\n";
  }

  auto outcome = [&](const NormInstance& inst) {
    out << "  norm " << inst.norm << " activated at " << inst.activation_time << ", window [" << inst.activation_end
        << "," << inst.deadline << "): " << to_string(inst.status);
    if (inst.status != NormStatus::pending)
      out << " at " << inst.resolved_at;
    if (inst.status == NormStatus::violated)
      for (const auto& n : d.norms())
        if (n.name == inst.norm)
          out << " (cost " << n.cost << ")";
    out << "\n";
  };
  std::vector<NormInstance> all = r.complied;
  all.insert(all.end(), r.violated.begin(), r.violated.end());
  all.insert(all.end(), r.pending.begin(), r.pending.end());
  std::sort(all.begin(), all.end(), [](const NormInstance& a, const NormInstance& b) {
    return std::tie(a.activation_time, a.norm) < std::tie(b.activation_time, b.norm);
  });
  for (const auto& inst : all)
    outcome(inst);
  out << "  satisfied: " << detail::join({r.satisfied.begin(), r.satisfied.end()}, ", ") << "\n";
  return out.str();
}

inline nlohmann::json to_json(const CheckReport& c, const Domain& d)
{
  nlohmann::json j{{"valid", c.valid}, {"utility_match", c.utility_match}, {"findings", c.findings()}};
  if (c.fault)
    j["fault"] = *c.fault;
  if (c.native_utility)
    j["native_utility"] = *c.native_utility;
  if (c.reported_utility)
    j["reported_utility"] = *c.reported_utility;
  if (c.plan)
    j["plan"] = to_json(*c.plan, d);
  return j;
}

inline nlohmann::json to_json(const ValidationReport& v)
{
  auto findings = nlohmann::json::array();
  for (const auto& f : v.findings)
    findings.push_back({{"severity", f.severity == Severity::error ? "error" : "warning"},
                        {"where", f.where},
                        {"message", f.message}});
  return {{"ok", v.ok()}, {"errors", v.error_count()}, {"warnings", v.warning_count()}, {"findings", findings}};
}

} // namespace nplan
