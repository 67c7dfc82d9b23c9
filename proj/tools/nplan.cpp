// nplan: validate normative planning problems, enumerate and optimize plans,
// emit answer-set programs and check solver answer sets.

#include <nplan/render.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace nplan;

enum Exit : int { ok = 0, usage = 1, invalid = 2, no_plan = 3, uncertified = 4 };

struct Options
{
  bool json = false;
  std::string mode = "start";
  std::string pending = "ignore";
  std::optional<Time> horizon;
  std::optional<double> time_budget;
};

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

SearchConfig make_config(const Options& o)
{
  if (!o.horizon)
    throw UsageError("--horizon is required for this command");
  SearchConfig cfg;
  cfg.horizon = *o.horizon;
  cfg.mode = o.mode == "start-end" ? ComplianceMode::start_and_end : ComplianceMode::start_only;
  cfg.pending = o.pending == "violate" ? PendingPolicy::violate
                : o.pending == "comply" ? PendingPolicy::comply
                                        : PendingPolicy::ignore;
  if (o.time_budget)
    cfg.time_budget = std::chrono::duration<double>(*o.time_budget);
  return cfg;
}

/// Loads the document; validation errors are reported, not thrown.
struct Loaded
{
  Problem problem;
  ValidationReport report;
};

Loaded load(const std::string& path)
{
  Loaded l;
  l.problem = read_problem_document(read_text_file(path));
  l.report = validate_problem(l.problem);
  return l;
}

void print_findings(const ValidationReport& r, std::ostream& os)
{
  for (const auto& f : r.findings)
    os << (f.severity == Severity::error ? "error" : "warning") << ": " << (f.where.empty() ? "" : f.where + ": ")
       << f.message << "\n";
}

/// Loads and validates; prints findings to stderr and returns nullopt on errors.
std::optional<Domain> load_domain(const std::string& path)
{
  auto l = load(path);
  if (!l.report.ok()) {
    print_findings(l.report, std::cerr);
    return std::nullopt;
  }
  return Domain(std::move(l.problem));
}

int cmd_validate(const Options& o, const std::string& file)
{
  auto l = load(file);
  if (o.json) {
    std::cout << to_json(l.report).dump(2) << "\n";
  } else {
    print_findings(l.report, std::cout);
    std::cout << (l.report.ok() ? "valid" : "invalid") << ": " << l.report.error_count() << " errors, "
              << l.report.warning_count() << " warnings\n";
  }
  return l.report.ok() ? Exit::ok : Exit::invalid;
}

int cmd_optimal(const Options& o, const std::string& file)
{
  auto cfg = make_config(o);
  auto d = load_domain(file);
  if (!d)
    return Exit::invalid;
  const auto result = optimal_plans(*d, cfg);
  if (o.json) {
    nlohmann::json doc{{"max_utility", nullptr}, {"certified", result.certified}, {"plans", nlohmann::json::array()}};
    if (result.max_utility)
      doc["max_utility"] = *result.max_utility;
    for (const auto& p : result.plans)
      doc["plans"].push_back(to_json(p, *d));
    std::cout << doc.dump(2) << "\n";
  } else if (!result.max_utility) {
    std::cout << "no plan\n";
  } else {
    std::cout << "max utility: " << *result.max_utility << "\n";
    std::cout << result.plans.size() << " optimal plans\n";
    for (const auto& p : result.plans)
      std::cout << "\n" << render_timeline(*d, p, cfg.horizon);
  }
  if (!result.certified) {
    std::cerr << "time budget exhausted: result is the best found, not certified\n";
    return Exit::uncertified;
  }
  return result.max_utility ? Exit::ok : Exit::no_plan;
}

int cmd_plan(const Options& o, const std::string& file, std::optional<std::size_t> max,
             std::optional<Utility> min_utility)
{
  auto cfg = make_config(o);
  cfg.max_plans = max;
  auto d = load_domain(file);
  if (!d)
    return Exit::invalid;
  auto plans = nlohmann::json::array();
  const auto result = enumerate_plans(
    *d, cfg,
    [&](const PlanReport& r) {
      if (o.json)
        plans.push_back(to_json(r, *d));
      else
        std::cout << "utility " << r.utility << "  " << to_string(r.schedule) << "\n";
      return true;
    },
    min_utility);
  if (o.json)
    std::cout << nlohmann::json{{"count", result.plans}, {"complete", result.complete}, {"plans", plans}}.dump(2)
              << "\n";
  else
    std::cout << result.plans << " plans\n";
  if (result.budget_exhausted) {
    std::cerr << "time budget exhausted: listing is partial\n";
    return Exit::uncertified;
  }
  return Exit::ok;
}

int cmd_emit_asp(const Options& o, const std::string& file, bool optimize, const std::string& out_path)
{
  if (!o.horizon)
    throw UsageError("--horizon is required for this command");
  if (*o.horizon < 1)
    throw UsageError("horizon must be ≥ 1");
  auto d = load_domain(file);
  if (!d)
    return Exit::invalid;
  const auto mode = o.mode == "start-end" ? ComplianceMode::start_and_end : ComplianceMode::start_only;
  const auto text = emit_base_program(*d, *o.horizon, mode).text(optimize);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << text))
      throw std::runtime_error("cannot write '" + out_path + "'");
  }
  return Exit::ok;
}

int cmd_check(const Options& o, const std::string& file, const std::string& answer_set_path,
              const std::string& schedule_path)
{
  auto cfg = make_config(o);
  if (answer_set_path.empty() == schedule_path.empty())
    throw UsageError("give exactly one of --answer-set or --schedule");
  auto d = load_domain(file);
  if (!d)
    return Exit::invalid;

  std::vector<AnswerSet> models;
  if (!answer_set_path.empty()) {
    models = read_answer_sets(read_text_file(answer_set_path), *d);
    if (models.empty())
      throw std::runtime_error("no answer set found in '" + answer_set_path + "'");
  } else {
    const auto doc = nlohmann::json::parse(read_text_file(schedule_path));
    auto add = [&](const nlohmann::json& j) {
      AnswerSet a;
      a.schedule = schedule_from_json(j);
      if (j.is_object() && j.contains("utility") && j.at("utility").is_number_integer())
        a.reported_utility = j.at("utility").get<Utility>();
      models.push_back(std::move(a));
    };
    if (doc.is_object() && doc.contains("plans"))
      for (const auto& p : doc.at("plans"))
        add(p);
    else
      add(doc);
    if (models.empty())
      throw std::runtime_error("no schedule found in '" + schedule_path + "'");
  }

  bool all_ok = true;
  auto reports = nlohmann::json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto report = cross_check(*d, cfg.horizon, models[i], cfg);
    all_ok = all_ok && report.ok();
    if (o.json) {
      reports.push_back(to_json(report, *d));
    } else {
      std::cout << "model " << i + 1 << " " << to_string(models[i].schedule) << "\n";
      for (const auto& f : report.findings())
        std::cout << "  " << f << "\n";
      if (report.native_utility)
        std::cout << "  utility " << *report.native_utility << "\n";
    }
  }
  if (o.json)
    std::cout << nlohmann::json{{"ok", all_ok}, {"reports", reports}}.dump(2) << "\n";
  return all_ok ? Exit::ok : Exit::no_plan;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Normative temporal planner"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_flag("--json", o.json, "Machine-readable output");
  app.add_option("--mode", o.mode, "Norm compliance: start or start-end")
    ->check(CLI::IsMember({"start", "start-end"}));
  app.add_option("--pending", o.pending, "Instances pending at the horizon: ignore, violate or comply")
    ->check(CLI::IsMember({"ignore", "violate", "comply"}));
  app.add_option("--horizon", o.horizon, "Number of time steps q");
  app.add_option("--time-budget", o.time_budget, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);

  std::string file;
  auto* validate = app.add_subcommand("validate", "Check a problem file");
  validate->add_option("file", file, "Problem file")->required();

  auto* plan = app.add_subcommand("plan", "List plans");
  plan->add_option("file", file, "Problem file")->required();
  bool all = false;
  std::optional<std::size_t> max;
  std::optional<Utility> min_utility;
  auto* all_flag = plan->add_flag("--all", all, "List every plan (default)");
  plan->add_option("--max", max, "Stop after N plans")->check(CLI::PositiveNumber)->excludes(all_flag);
  plan->add_option("--min-utility", min_utility, "Only plans with at least this utility");

  auto* optimal = app.add_subcommand("optimal", "Utility-maximal plans");
  optimal->add_option("file", file, "Problem file")->required();

  auto* emit = app.add_subcommand("emit-asp", "Write the answer-set program");
  emit->add_option("file", file, "Problem file")->required();
  bool optimize = false;
  std::string out_path;
  emit->add_flag("--optimize", optimize, "Append the optimization block");
  emit->add_option("-o,--output", out_path, "Output file (default stdout)");

  auto* check = app.add_subcommand("check", "Check answer sets or schedules against the native semantics");
  check->add_option("file", file, "Problem file")->required();
  std::string answer_set_path, schedule_path;
  check->add_option("--answer-set", answer_set_path, "Solver output, one model per line");
  check->add_option("--schedule", schedule_path, "JSON plan or plan list as printed with --json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Exit::usage;
  }

  try {
    if (*validate)
      return cmd_validate(o, file);
    if (*plan)
      return cmd_plan(o, file, max, min_utility);
    if (*optimal)
      return cmd_optimal(o, file);
    if (*emit)
      return cmd_emit_asp(o, file, optimize, out_path);
    if (*check)
      return cmd_check(o, file, answer_set_path, schedule_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::usage;
  }
  return Exit::usage;
}
