#pragma once

#include <nplan/problem_io.hpp>

#include <filesystem>
#include <string>

namespace fixtures {

inline std::filesystem::path scenario_path(const std::string& name = "disaster.nprp")
{
  return std::filesystem::path(NPLAN_SCENARIO_DIR) / name;
}

inline nplan::Problem disaster() { return nplan::load_problem(scenario_path()); }

inline nplan::LiteralSet lits(std::initializer_list<const char*> texts)
{
  std::vector<std::string> v(texts.begin(), texts.end());
  return nplan::LiteralSet::from_strings(v);
}

/// One action a (no pre, post p, duration 1) and one goal requiring p.
inline nplan::Problem single_action()
{
  nplan::Problem p;
  p.name = "single";
  p.fluents = {"p"};
  p.actions = {{"a", {}, lits({"p"}), 1}};
  p.goals = {{"g", lits({"p"}), 1}};
  return p;
}

} // namespace fixtures
