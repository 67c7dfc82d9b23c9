#include "fixtures.hpp"
#include "oracles.hpp"

#include <nplan/aspgen.hpp>

#include <gtest/gtest.h>

using namespace nplan;
using fixtures::lits;

namespace {

const Domain& disaster()
{
  static const Domain d(fixtures::disaster());
  return d;
}

std::vector<std::string> lines_of(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

std::size_t count_prefix(const std::vector<std::string>& lines, std::string_view prefix)
{
  return static_cast<std::size_t>(
    std::count_if(lines.begin(), lines.end(), [&](const std::string& l) { return l.starts_with(prefix); }));
}

bool has_line(const std::vector<std::string>& lines, std::string_view line)
{
  return std::find(lines.begin(), lines.end(), line) != lines.end();
}

/// Constraint lines emitted for concurrency conflicts.
std::size_t conflict_constraints(const std::vector<std::string>& lines)
{
  auto it = std::find(lines.begin(), lines.end(), "% conflicting actions");
  if (it == lines.end())
    return 0;
  return static_cast<std::size_t>(std::count_if(std::next(it), lines.end(), [](const std::string& l) {
    return l.starts_with(":- ") && l.find("% ") != 0;
  }));
}

SearchConfig at(Time q)
{
  SearchConfig cfg;
  cfg.horizon = q;
  return cfg;
}

} // namespace

TEST(Emit, StateFactsAtHorizonTwo)
{
  const auto lines = lines_of(emit_base_program(disaster(), 2).text(true));
  EXPECT_EQ(count_prefix(lines, "state("), 3u);
  EXPECT_TRUE(has_line(lines, "state(0)."));
  EXPECT_TRUE(has_line(lines, "state(1)."));
  EXPECT_TRUE(has_line(lines, "state(2)."));
}

TEST(Emit, ScenarioFacts)
{
  const auto prog = emit_base_program(disaster(), 13);
  const auto lines = prog.base_rules;
  EXPECT_EQ(prog.horizon, 13);
  EXPECT_EQ(count_prefix(lines, "state("), 14u);
  EXPECT_EQ(count_prefix(lines, "action("), 7u);
  EXPECT_TRUE(has_line(lines, "action(evacuate,5)."));
  EXPECT_TRUE(has_line(lines, "norm(n1,5)."));
  EXPECT_TRUE(has_line(lines, "norm(n2,10)."));
  EXPECT_TRUE(has_line(lines, "goal(runninghospital,25)."));
  for (const auto* f : {"earthquakedetected", "medicspresent", "wounded", "populated", "watersupplied"})
    EXPECT_TRUE(has_line(lines, std::string("holdsat(") + f + ",0)."));
  EXPECT_EQ(std::count_if(lines.begin(), lines.end(),
                          [](const std::string& l) { return l.starts_with("holdsat(") && l.ends_with(",0)."); }),
            5);
  EXPECT_TRUE(has_line(lines, "pre(evacuate,S) :- holdsat(populated,S), holdsat(shockdetected,S), state(S)."));
  EXPECT_TRUE(has_line(lines, "terminated(populated,S2) :- executed(evacuate,S1), action(evacuate,5), state(S1), "
                              "state(S2), S2=S1+5-1."));
  EXPECT_TRUE(has_line(lines, ":- not satisfied(organisesurvivorcamp), not satisfied(runninghospital)."));
}

TEST(Emit, ConflictConstraintForEvacuateAndBuildShelter)
{
  const auto lines = emit_base_program(disaster(), 13).base_rules;
  const bool found = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
    return l.starts_with(":-") && l.find("inprog(evacuate,S)") != std::string::npos &&
           l.find("inprog(buildshelter,S)") != std::string::npos;
  });
  EXPECT_TRUE(found);
  EXPECT_EQ(conflict_constraints(lines), conflicting_actions(disaster()).size());
}

TEST(Emit, NormBlocksMatchKinds)
{
  const auto lines = emit_base_program(disaster(), 13).base_rules;
  EXPECT_EQ(count_prefix(lines, "holdsat(o(n2,S1,stopwater,2+S2),S2) :- executed(detectpoison,S1)"), 1u);
  EXPECT_EQ(count_prefix(lines, "holdsat(f(n1,S1,buildshelter,3+S2),S2) :- executed(detectshock,S1)"), 1u);
  EXPECT_EQ(count_prefix(lines, "cmp(o("), 1u);
  EXPECT_EQ(count_prefix(lines, "vol(o("), 1u);
  EXPECT_EQ(count_prefix(lines, "cmp(f("), 1u);
  EXPECT_EQ(count_prefix(lines, "vol(f("), 1u);
  EXPECT_EQ(count_prefix(lines, "terminated(o("), 2u);
  EXPECT_EQ(count_prefix(lines, "terminated(f("), 2u);
  EXPECT_TRUE(has_line(lines, "cmp(o(n2,S1,stopwater,DL),S2) :- holdsat(o(n2,S1,stopwater,DL),S2), "
                              "executed(stopwater,S2), action(stopwater,1), state(S1), state(S2), S2!=DL."));
  EXPECT_TRUE(has_line(lines, "vol(f(n1,S1,buildshelter,DL),S2) :- holdsat(f(n1,S1,buildshelter,DL),S2), "
                              "executed(buildshelter,S2), action(buildshelter,4), state(S1), state(S2), S2!=DL."));

  const auto strict = emit_base_program(disaster(), 13, ComplianceMode::start_and_end).base_rules;
  EXPECT_EQ(count_prefix(strict, "cmp(o(n2"), 1u);
  EXPECT_TRUE(std::any_of(strict.begin(), strict.end(),
                          [](const std::string& l) { return l.find("S2+1<DL") != std::string::npos; }));
}

TEST(Emit, OptimizationBlock)
{
  const auto rules = emit_optimization();
  ASSERT_FALSE(rules.empty());
  EXPECT_EQ(rules.back(), "#maximize {U:utility(U)}.");
  EXPECT_TRUE(has_line(rules, "utility(TV-TC) :- value(TV), cost(TC)."));

  const auto with = lines_of(emit_base_program(disaster(), 13).text(true));
  EXPECT_EQ(with.back(), "#maximize {U:utility(U)}.");
  const auto without = emit_base_program(disaster(), 13).text(false);
  EXPECT_EQ(without.find("#maximize"), std::string::npos);

  auto p = fixtures::disaster();
  p.norms.clear();
  const auto none = lines_of(emit_base_program(Domain(p), 3).text(true));
  EXPECT_EQ(count_prefix(none, "cost(TC)"), 1u);
  EXPECT_EQ(count_prefix(none, "norm("), 0u);
}

TEST(Emit, EmptyGoalSetForbidsEveryModel)
{
  auto p = fixtures::single_action();
  p.goals.clear();
  const auto lines = emit_base_program(Domain(p), 2).base_rules;
  EXPECT_TRUE(has_line(lines, ":- #true."));
}

TEST(Emit, HeaderRecordsProvenanceAndNames)
{
  const auto prog = emit_base_program(disaster(), 13);
  EXPECT_TRUE(has_line(prog.header, "% problem: disaster"));
  EXPECT_TRUE(has_line(prog.header, "% horizon: 13"));
  EXPECT_TRUE(has_line(prog.header, "% generator: " + std::string(generator_version)));
  EXPECT_TRUE(has_line(prog.header, "% name: buildShelter = buildshelter"));
  for (const auto& l : prog.header)
    EXPECT_TRUE(l.starts_with("%"));
}

TEST(Emit, ByteStableAndOrderInsensitive)
{
  const auto a = emit_base_program(disaster(), 13).text(true);
  const auto b = emit_base_program(disaster(), 13).text(true);
  EXPECT_EQ(a, b);
  auto p = fixtures::disaster();
  std::reverse(p.actions.begin(), p.actions.end());
  std::reverse(p.norms.begin(), p.norms.end());
  std::reverse(p.fluents.begin(), p.fluents.end());
  EXPECT_EQ(emit_base_program(Domain(p), 13).text(true), a);
}

TEST(Emit, HorizonMustBePositive)
{
  try {
    emit_base_program(disaster(), 0);
    FAIL();
  } catch (const AspError& e) {
    EXPECT_STREQ(e.what(), "horizon must be ≥ 1");
  }
}

TEST(Emit, StructureOnRandomProblems)
{
  std::mt19937 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Domain d(oracle::random_problem(rng));
    const auto lines = lines_of(emit_base_program(d, 2).text(true));
    EXPECT_EQ(count_prefix(lines, "state("), 3u);
    EXPECT_EQ(count_prefix(lines, "action("), d.actions().size());
    EXPECT_EQ(conflict_constraints(lines), conflicting_actions(d).size());
    EXPECT_EQ(lines.back(), "#maximize {U:utility(U)}.");
  }
}

TEST(Mangling, LowerCaseWithSuffixes)
{
  Problem p;
  p.fluents = {"Door", "door", "x"};
  p.actions = {{"Open", {}, lits({"Door"}), 1}, {"open", {}, lits({"door"}), 1}, {"_hidden", {}, {}, 1}};
  p.goals = {{"g", lits({"x"}), 1}};
  const NameMangler m(p);
  EXPECT_EQ(m.mangle("Door"), "door");
  EXPECT_EQ(m.mangle("door"), "door_2");
  EXPECT_EQ(m.mangle("Open"), "open");
  EXPECT_EQ(m.mangle("open"), "open_2");
  EXPECT_EQ(m.mangle("_hidden"), "c__hidden");
  for (const auto& [from, to] : m.table())
    EXPECT_EQ(m.unmangle(to), from);

  const auto text = emit_base_program(Domain(p), 2).text(false);
  EXPECT_NE(text.find("% name: door = door_2"), std::string::npos);
}

TEST(Mangling, ReservedWords)
{
  Problem p;
  p.fluents = {"not", "o"};
  p.actions = {{"f", {}, lits({"not"}), 1}};
  p.goals = {{"g", lits({"o"}), 1}};
  const NameMangler m(p);
  EXPECT_NE(m.mangle("not"), "not");
  EXPECT_NE(m.mangle("o"), "o");
  EXPECT_NE(m.mangle("f"), "f");
}

TEST(Mangling, UnrepresentableIdentifier)
{
  Problem p;
  p.fluents = {"x-y"};
  p.actions = {{"a", {}, lits({"x-y"}), 1}};
  p.goals = {{"g", lits({"x-y"}), 1}};
  EXPECT_THROW(emit_base_program(Domain(p), 2), AspError);
}

TEST(AnswerSets, ParseExamples)
{
  const auto a = parse_answer_set("executed(detectpoison,5) state(5) holdsat(wounded,0)", disaster());
  EXPECT_EQ(a.schedule, (Schedule{{5, "detectPoison"}}));
  EXPECT_EQ(a.atoms.size(), 3u);
  EXPECT_FALSE(a.reported_utility);

  EXPECT_EQ(parse_answer_set("utility(43)", disaster()).reported_utility, 43);
  EXPECT_EQ(parse_answer_set("utility(-7) holdsat(o(n2,1,stopwater,4),3)", disaster()).reported_utility, -7);

  try {
    parse_answer_set("executed(bogus,1)", disaster());
    FAIL();
  } catch (const AspError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown action"), std::string::npos);
  }
}

TEST(AnswerSets, MalformedAtoms)
{
  for (const auto* text : {"executed(detectpoison,", "executed(Detect,1)", "executed(detectpoison)", "utility(x)",
                           "42", "executed(detectpoison,1))", "holdsat(a,,1)"})
    EXPECT_THROW(parse_answer_set(text, disaster()), AspError) << text;
}

TEST(AnswerSets, RoundTrip)
{
  std::mt19937 rng(9);
  const auto& d = disaster();
  const NameMangler m(d.problem());
  for (int i = 0; i < 200; ++i) {
    std::vector<ScheduledAction> entries;
    std::vector<std::string> atoms{"state(0)", "holdsat(wounded,0)", "inprog(secure,3)"};
    for (auto& [t, a] : oracle::random_entries(rng, d.problem(), 13)) {
      entries.push_back({t, a});
      atoms.push_back("executed(" + m.mangle(a) + "," + std::to_string(t) + ")");
    }
    std::shuffle(atoms.begin(), atoms.end(), rng);
    EXPECT_EQ(parse_answer_set(detail::join(atoms, " "), d).schedule, Schedule(entries));
  }
}

TEST(AnswerSets, ReaderSkipsSolverChatter)
{
  const std::string out = "pyclingo version 5.8.2\nclingo version 5.6.2\nReading from program.lp\nSolving...\nAnswer: 1\n"
                          "executed(getmedicine,0) utility(25)\nOptimization: -25\nAnswer: 2\n"
                          "executed(getmedicine,1) utility(25)\nOPTIMUM FOUND\n";
  const auto models = read_answer_sets(out, disaster());
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[1].schedule, (Schedule{{1, "getMedicine"}}));
}

TEST(CrossCheck, NativeOptimalPlanWithUtility43)
{
  const auto& d = disaster();
  const auto opt = optimal_plans(d, at(13));
  ASSERT_FALSE(opt.plans.empty());
  const NameMangler m(d.problem());
  std::vector<std::string> atoms{"utility(43)"};
  for (const auto& e : opt.plans.front().schedule)
    atoms.push_back("executed(" + m.mangle(e.action) + "," + std::to_string(e.start) + ")");
  const auto report = cross_check(d, 13, parse_answer_set(detail::join(atoms, " "), d), at(13));
  EXPECT_TRUE(report.valid);
  EXPECT_TRUE(report.utility_match);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.native_utility, 43);
}

TEST(CrossCheck, OverlapIsInvalid)
{
  const auto& d = disaster();
  const auto ans = parse_answer_set("executed(detectshock,0) executed(evacuate,1) executed(buildshelter,3)", d);
  const auto report = cross_check(d, 13, ans, at(13));
  EXPECT_FALSE(report.valid);
  ASSERT_TRUE(report.fault);
  EXPECT_NE(report.fault->find("ConflictOverlap"), std::string::npos);
}

TEST(CrossCheck, EmptyScheduleIsInvalid)
{
  const auto report = cross_check(disaster(), 13, parse_answer_set("state(0)", disaster()), at(13));
  EXPECT_FALSE(report.valid);
  EXPECT_EQ(report.fault, "NoGoalSatisfied");
}

TEST(CrossCheck, UtilityMismatch)
{
  const auto& d = disaster();
  const auto report = cross_check(d, 13, parse_answer_set("executed(getmedicine,0) utility(43)", d), at(13));
  EXPECT_TRUE(report.valid);
  EXPECT_FALSE(report.utility_match);
  EXPECT_FALSE(report.ok());
  EXPECT_EQ(report.findings().back(), "utility mismatch: native 25, reported 43");
}
