#include "lowsync/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lowsync/errors.hpp"
#include "lowsync/matrix_market.hpp"

namespace lowsync {
namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double> &v) {
  return v ? format_double(*v) : std::string{};
}

template <class T> T parse_number(std::string_view text, const char *what) {
  T value{};
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  return value;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

} // namespace

std::string ProblemSpec::describe() const {
  switch (kind) {
  case Kind::mtx_file: return "mtx:" + path.string();
  case Kind::simoncini: return "simoncini:" + std::to_string(n) + "," + format_double(first);
  case Kind::laplace2d: return "laplace2d:" + std::to_string(nx);
  }
  return "unknown";
}

ProblemSpec parse_problem(std::string_view text) {
  ProblemSpec spec;
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "simoncini") {
    spec.kind = ProblemSpec::Kind::simoncini;
    if (!args.empty()) {
      const auto comma = args.find(',');
      spec.n = parse_number<std::size_t>(args.substr(0, comma), "simoncini size");
      if (comma != std::string_view::npos)
        spec.first = parse_number<double>(args.substr(comma + 1), "simoncini first entry");
    }
    if (spec.n == 0) throw std::invalid_argument("simoncini size must be positive");
    return spec;
  }
  if (name == "laplace2d") {
    spec.kind = ProblemSpec::Kind::laplace2d;
    if (!args.empty()) spec.nx = parse_number<std::size_t>(args, "laplace2d grid size");
    if (spec.nx == 0) throw std::invalid_argument("laplace2d grid size must be positive");
    return spec;
  }
  throw std::invalid_argument("unknown problem '" + std::string(text) + "'");
}

RhsSpec parse_rhs(std::string_view text) {
  if (text == "ones-image" || text == "ones_image") return {RhsKind::ones_image, 0};
  if (text == "random") return {RhsKind::random, 42};
  if (text.starts_with("random:"))
    return {RhsKind::random, parse_number<std::uint64_t>(text.substr(7), "seed")};
  throw std::invalid_argument("unknown right-hand side '" + std::string(text) + "'");
}

std::optional<PreconditionerKind> parse_precond(std::string_view text) {
  if (text == "none") return PreconditionerKind::none;
  if (text == "jacobi") return PreconditionerKind::jacobi;
  return std::nullopt;
}

int exit_code_for(Outcome outcome) {
  switch (outcome) {
  case Outcome::converged: return 0;
  case Outcome::stalled_maxiter: return 2;
  case Outcome::breakdown:
  case Outcome::cancellation_failure: return 3;
  }
  return 3;
}

CsrMatrix build_problem(const ProblemSpec &problem) {
  switch (problem.kind) {
  case ProblemSpec::Kind::mtx_file: return load_matrix_market(problem.path);
  case ProblemSpec::Kind::simoncini: return gen_simoncini(problem.n, problem.first);
  case ProblemSpec::Kind::laplace2d: return gen_laplace2d(problem.nx);
  }
  throw std::logic_error("build_problem: unknown kind");
}

ExperimentResult run_experiment(const ExperimentSpec &spec) {
  const CsrMatrix a = build_problem(spec.problem);
  const auto b = gen_rhs(spec.rhs, a);

  ExperimentResult result;
  result.n = a.n_rows();
  DiagnosticsOptions diag;
  diag.enabled = spec.diagnostics.value_or(a.n_rows() <= 2000);
  diag.every = spec.diagnostics_every;
  result.solve = solve(a, b, {}, spec.solver, result.ledger, diag);
  result.exit_code = exit_code_for(result.solve.history.outcome);

  if (spec.csv_path) {
    auto out = open_output(*spec.csv_path);
    write_csv(out, result.solve.history);
  }
  if (spec.json_path) {
    auto out = open_output(*spec.json_path);
    out << summary_json(spec, result) << '\n';
  }
  if (spec.plot_path)
    emit_plot_data(*spec.plot_path, result.solve.history, to_string(spec.solver.method),
                   spec.problem.describe());
  return result;
}

void write_csv(std::ostream &out, const ConvergenceHistory &history) {
  out << "iter,implicit_rel_res,true_rel_res,s_norm,orth_loss,reductions\n";
  for (const auto &rec : history.records) {
    out << rec.iter << ',' << format_double(rec.implicit_rel_res) << ','
        << format_optional(rec.true_rel_res) << ',' << format_optional(rec.s_norm) << ','
        << format_optional(rec.orth_loss) << ',' << rec.reductions << '\n';
  }
}

std::string summary_json(const ExperimentSpec &spec, const ExperimentResult &result) {
  using nlohmann::json;
  const auto &history = result.solve.history;
  const auto &ledger = result.ledger;

  json by_kind = json::object();
  for (auto kind : {ReductionKind::mdot, ReductionKind::norm, ReductionKind::fused_mdot_norm,
                    ReductionKind::dot})
    by_kind[std::string(to_string(kind))] = ledger.count_of_kind(kind);

  json config = {
      {"problem", spec.problem.describe()},
      {"n", result.n},
      {"rhs", spec.rhs.kind == RhsKind::random ? "random" : "ones-image"},
      {"method", std::string(to_string(spec.solver.method))},
      {"restart", spec.solver.restart_m},
      {"max_restarts", spec.solver.max_restarts},
      {"tol", spec.solver.rel_tol},
      {"precond", spec.solver.precond == PreconditionerKind::jacobi ? "jacobi" : "none"},
      {"breakdown_tol_factor", spec.solver.breakdown_tol_factor},
      {"diag_every", spec.diagnostics_every},
  };
  if (spec.rhs.kind == RhsKind::random) config["seed"] = spec.rhs.seed;

  json summary = {
      {"outcome", std::string(to_string(history.outcome))},
      {"iterations", history.iterations()},
      {"restarts", history.restarts},
      {"total_reductions", ledger.size()},
      {"reductions_by_kind", by_kind},
      {"config", config},
  };
  if (auto stall = history.stall_iteration()) summary["stall_iteration"] = *stall;
  else summary["stall_iteration"] = nullptr;
  if (!history.records.empty())
    summary["final_implicit_rel_res"] = history.records.back().implicit_rel_res;
  if (history.final_true_rel_res) summary["final_true_rel_res"] = *history.final_true_rel_res;
  return summary.dump(2);
}

void emit_plot_data(std::ostream &out, const ConvergenceHistory &history,
                    std::string_view method, std::string_view problem) {
  out << "# method: " << method << '\n';
  out << "# problem: " << problem << '\n';
  out << "# iter rel_res s_norm\n";
  for (const auto &rec : history.records)
    out << rec.iter << ' ' << format_double(rec.implicit_rel_res) << ' '
        << format_double(rec.s_norm.value_or(std::numeric_limits<double>::quiet_NaN())) << '\n';
}

void emit_plot_data(const std::filesystem::path &path, const ConvergenceHistory &history,
                    std::string_view method, std::string_view problem) {
  auto out = open_output(path);
  emit_plot_data(out, history, method, problem);
}

std::vector<PlotRow> read_plot_data(std::istream &in) {
  std::vector<PlotRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string iter, res, s;
    if (!(fields >> iter >> res >> s)) throw FormatError("plot data: malformed line '" + line + "'");
    auto to_double = [](const std::string &t) {
      return t == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(t);
    };
    rows.push_back({parse_number<std::size_t>(iter, "iteration"), to_double(res), to_double(s)});
  }
  return rows;
}

} // namespace lowsync
