#include "rotorwalk/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "rotorwalk/admissibility.hpp"
#include "rotorwalk/dynamics.hpp"
#include "rotorwalk/medium.hpp"
#include "rotorwalk/stats.hpp"
#include "rotorwalk/structures.hpp"
#include "rotorwalk/svg.hpp"

namespace rotorwalk::cli {

namespace {

struct MediumOptions {
  std::string model = "iid";
  std::optional<double> p;
  std::uint64_t seed = 0;
  int color_class = 0;
  std::string medium_file;
};

void add_medium_options(CLI::App* sub, MediumOptions& m, bool allow_explicit) {
  std::vector<std::string> models = {"iid", "family", "admissible", "all-left", "all-right"};
  if (allow_explicit) models.emplace_back("explicit");
  sub->add_option("--model", m.model, "Scatterer medium")->check(CLI::IsMember(models));
  sub->add_option("--p", m.p, "Probability of a right rotator (iid, family, admissible)");
  sub->add_option("--seed", m.seed, "Medium seed (master seed for ensembles)");
  sub->add_option("--color-class", m.color_class, "Shaded face color class for admissible media")
      ->check(CLI::Range(0, 2));
  if (allow_explicit) {
    sub->add_option("--medium", m.medium_file, "Snapshot file for the explicit model");
  }
}

ModelSpec model_spec(const MediumOptions& m) {
  ModelSpec spec;
  const bool needs_p = m.model == "iid" || m.model == "family" || m.model == "admissible";
  if (needs_p && !m.p) throw UsageError(fmt::format("--p is required for --model {}", m.model));
  if (!needs_p && m.p) throw UsageError(fmt::format("--p is not accepted for --model {}", m.model));
  if (m.p && !(*m.p >= 0.0 && *m.p <= 1.0)) throw UsageError(fmt::format("--p {} outside [0,1]", *m.p));
  if (m.model == "iid") spec.kind = ModelKind::IID;
  else if (m.model == "family") spec.kind = ModelKind::Family;
  else if (m.model == "admissible") spec.kind = ModelKind::Admissible;
  else if (m.model == "all-left") spec.kind = ModelKind::AllLeft;
  else if (m.model == "all-right") spec.kind = ModelKind::AllRight;
  else throw UsageError(fmt::format("--model {} is not available here", m.model));
  spec.p = m.p.value_or(spec.kind == ModelKind::AllRight ? 1.0 : 0.0);
  spec.color_class = m.color_class;
  return spec;
}

MediumSpec medium_spec(const MediumOptions& m) {
  if (m.model != "explicit") {
    if (!m.medium_file.empty()) throw UsageError("--medium is only accepted with --model explicit");
    return model_spec(m).build(m.seed);
  }
  if (m.p) throw UsageError("--p is not accepted for --model explicit");
  if (m.medium_file.empty()) throw UsageError("--model explicit requires --medium <snapshot>");
  std::ifstream in(m.medium_file);
  if (!in) throw IoError(fmt::format("cannot open {}", m.medium_file));
  return Snapshot::read(in).restore(Orientation::Left);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write {}", path));
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto f = open_out(path);
  f << content;
  if (!f) throw IoError(fmt::format("write failed for {}", path));
}

ClassTable resolve_table(const std::string& spec) {
  if (spec == "adjacent" || spec == "meta") return ClassTable::builtin(spec);
  std::ifstream in(spec);
  if (!in) throw IoError(fmt::format("cannot open table {}", spec));
  return ClassTable::read(in, spec);
}

std::int64_t resolve_cap(const std::optional<long long>& steps) {
  const long long cap = steps ? *steps : default_step_cap(std::getenv(kStepCapEnv));
  if (cap < 0) throw UsageError("--steps must be non-negative");
  return cap;
}

// Diamonds go at the bases of confirmed reflectors.
std::vector<Point> reflector_bases_from_jsonl(const std::string& jsonl) {
  std::vector<Point> out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("malformed events line: " + line);
    if (j.value("kind", "") != to_string(EventKind::ReflectorConfirmed)) continue;
    const auto& b = j.at("base");
    const SiteCoord s{b.at("a").get<std::int32_t>(), b.at("b").get<std::int32_t>(),
                      b.at("sub").get<std::string>() == "A" ? Sublattice::A : Sublattice::B};
    out.push_back(embed(s));
  }
  return out;
}

std::string render_trajectory(const std::string& trajectory_csv, const std::string& events_jsonl) {
  std::istringstream in(trajectory_csv);
  const CsvTable table = read_csv(in);
  const auto xs = table.numbers("x");
  const auto ys = table.numbers("y");
  std::vector<Point> path;
  path.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size() && k < ys.size(); ++k) path.push_back({xs[k], ys[k]});
  std::ostringstream svg;
  write_trajectory_svg(svg, path, reflector_bases_from_jsonl(events_jsonl));
  return svg.str();
}

std::string render_chart(const std::string& csv, const std::string& x, const std::vector<std::string>& ys,
                         const ChartOptions& options) {
  std::istringstream in(csv);
  const CsvTable table = read_csv(in);
  std::vector<ChartSeries> series;
  for (const auto& y : ys) series.push_back(xy_series(table, x, y));
  std::ostringstream svg;
  write_line_chart_svg(svg, series, options);
  return svg.str();
}

class TrajectoryCsvWriter : public TrajectoryObserver {
 public:
  explicit TrajectoryCsvWriter(std::ostream& out) : out_(out) { out_ << "t,a,b,sub,x,y\n"; }
  void on_start(const SimState& s) override { write(s); }
  bool on_step(const SimState& s) override {
    write(s);
    return true;
  }

 private:
  void write(const SimState& s) {
    const Point p = embed(s.site);
    fmt::print(out_, "{},{},{},{},{},{}\n", s.time, s.site.a, s.site.b,
               s.site.sub == Sublattice::A ? 'A' : 'B', p.x, p.y);
  }
  std::ostream& out_;
};

class DisplacementCsvWriter : public TrajectoryObserver {
 public:
  explicit DisplacementCsvWriter(std::ostream& out) : out_(out) { out_ << "t,sq_disp\n"; }
  void on_start(const SimState& s) override { write(s); }
  bool on_step(const SimState& s) override {
    write(s);
    return true;
  }

 private:
  void write(const SimState& s) { fmt::print(out_, "{},{}\n", s.time, squared_norm(s.site)); }
  std::ostream& out_;
};

// --- subcommands --------------------------------------------------------------

struct RunArgs {
  MediumOptions medium;
  std::optional<long long> steps;
  std::string events, trajectory, csv, svg, snapshot;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  Medium medium(medium_spec(a.medium));
  const std::int64_t cap = resolve_cap(a.steps);

  TrajectoryAnalyzer analyzer;
  std::ostringstream trajectory_buf, displacement_buf;
  std::optional<TrajectoryCsvWriter> traj;
  std::optional<DisplacementCsvWriter> disp;
  std::vector<TrajectoryObserver*> observers = {&analyzer};
  if (!a.trajectory.empty() || !a.svg.empty()) observers.push_back(&traj.emplace(trajectory_buf));
  if (!a.csv.empty()) observers.push_back(&disp.emplace(displacement_buf));

  const RunOutcome outcome = run(medium, cap, observers);

  std::ostringstream events_buf;
  write_events_jsonl(events_buf, analyzer.events());
  if (!a.events.empty()) write_file(a.events, events_buf.str());
  if (!a.trajectory.empty()) write_file(a.trajectory, trajectory_buf.str());
  if (!a.csv.empty()) write_file(a.csv, displacement_buf.str());
  if (!a.svg.empty()) write_file(a.svg, render_trajectory(trajectory_buf.str(), events_buf.str()));
  if (!a.snapshot.empty()) {
    const auto sites = medium.touched_sites();
    auto f = open_out(a.snapshot);
    medium.snapshot(sites).write(f);
  }

  if (outcome.periodic()) {
    fmt::print(out, "periodic period={}\n", outcome.steps);
  } else {
    fmt::print(out, "{} steps={}\n", to_string(outcome.kind), outcome.steps);
  }
  fmt::print(out, "reflectors={} semi_reflectors={} annihilations={} origin_returns={} max_sq_disp={}\n",
             analyzer.reflector_count(), analyzer.semi_reflector_count(), analyzer.annihilation_count(),
             outcome.origin_returns.size(), outcome.max_displacement_sq);
  return kExitOk;
}

struct EnsembleArgs {
  MediumOptions medium;
  std::optional<long long> steps;
  std::size_t realizations = 200;
  unsigned threads = 0;
  std::string observable = "periods";
  std::int64_t horizon = 3000;
  std::int64_t every = 10;
  std::vector<double> fit;
  std::string csv, svg;
  bool analyze = false;
};

EnsembleSpec ensemble_spec(const MediumOptions& m, std::optional<long long> steps, std::size_t realizations,
                           unsigned threads) {
  EnsembleSpec spec;
  spec.model = model_spec(m);
  spec.master_seed = m.seed;
  spec.step_cap = resolve_cap(steps);
  spec.realizations = realizations;
  spec.threads = threads;
  return spec;
}

int cmd_ensemble(const EnsembleArgs& a, std::ostream& out) {
  EnsembleSpec spec = ensemble_spec(a.medium, a.steps, a.realizations, a.threads);
  spec.analyze = a.analyze;
  spec.msd_horizon = a.horizon;
  spec.record_every = a.every;
  std::ostringstream csv;
  if (a.observable == "periods") {
    const auto runs = run_ensemble(spec);
    write_periods_csv(csv, runs);
    try {
      const PeriodSummary s = summarize_periods(runs);
      fmt::print(out, "mean_period={} median_period={} capped_fraction={} n_periodic={}\n", s.mean_period,
                 s.median_period, s.capped_fraction, s.n_periodic);
    } catch (const AllRunsCapped&) {
      fmt::print(out, "all runs capped n={}\n", runs.size());
    }
    if (!a.svg.empty()) {
      write_file(a.svg, render_chart(csv.str(), "seed_index", {"period"},
                                     {"periods by realization", "seed index", "period", false, true}));
    }
  } else {
    if (a.horizon < 1) throw UsageError("--horizon must be at least 1");
    if (a.every < 1) throw UsageError("--every must be at least 1");
    SeriesResult series = msd_series(spec);
    write_msd_csv(csv, series);
    fmt::print(out, "msd t={} value={}\n", series.times.back(), series.values.back());
    if (!a.fit.empty()) {
      if (a.fit.size() != 2) throw UsageError("--fit takes two values: tmin tmax");
      const PowerLawFit fit = powerlaw_fit(series, a.fit[0], a.fit[1]);
      fmt::print(out, "exponent={} prefactor={} residual={} points={}\n", fit.exponent, fit.prefactor,
                 fit.residual, fit.points);
    }
    if (!a.svg.empty()) {
      write_file(a.svg, render_chart(csv.str(), "t", {"mean_sq_disp"},
                                     {"mean squared displacement", "t", "mean squared displacement",
                                      !a.fit.empty(), !a.fit.empty()}));
    }
  }
  if (a.csv.empty()) {
    out << csv.str();
  } else {
    write_file(a.csv, csv.str());
  }
  return kExitOk;
}

struct SweepArgs {
  MediumOptions medium;
  std::optional<long long> steps;
  std::size_t realizations = 200;
  unsigned threads = 0;
  std::string grid;
  std::string csv, svg;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const std::vector<double> grid = parse_grid(a.grid);
  MediumOptions m = a.medium;
  if (m.p) throw UsageError("sweep takes --grid instead of --p");
  m.p = grid.front();
  const EnsembleSpec spec = ensemble_spec(m, a.steps, a.realizations, a.threads);
  if (spec.model.kind == ModelKind::AllLeft || spec.model.kind == ModelKind::AllRight) {
    throw UsageError("sweep needs a model parameterized by p");
  }
  for (const double p : grid) {
    if (!(p > 0.0 && p < 1.0)) throw UsageError(fmt::format("grid value {} outside (0,1)", p));
  }
  const auto rows = sweep(spec, grid);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  if (a.csv.empty()) {
    out << csv.str();
  } else {
    write_file(a.csv, csv.str());
  }
  if (!a.svg.empty()) {
    write_file(a.svg, render_chart(csv.str(), "p", {"mean_period", "median_period"},
                                   {"average period", "p", "period", false, true}));
  }
  return kExitOk;
}

int cmd_classify(const std::string& table_spec, bool enumerate, std::ostream& out) {
  const ClassTable table = resolve_table(table_spec);
  const auto& reps = class_representatives();
  out << "class,representative,orbit_size,right_count,admissible\n";
  int orbit_total = 0;
  for (int c = 0; c < kClassCount; ++c) {
    const HexConfig r = reps[static_cast<std::size_t>(c)];
    orbit_total += orbit_size(c);
    fmt::print(out, "{},{},{},{},{}\n", c, to_string(r), orbit_size(c), r.right_count(),
               table.admissible_class(c) ? "yes" : "no");
  }
  const auto coeff = admissible_polynomial(table);
  fmt::print(out, "classes={} admissible_classes={} configurations={} table={}\n", kClassCount,
             table.admissible_class_count(), orbit_total, table.name());
  fmt::print(out, "admissible_by_right_count={}\n", fmt::join(table.counts_by_right(), " "));
  fmt::print(out, "polynomial_coefficients={}\n", fmt::join(coeff, " "));
  fmt::print(out, "P(1/2)={}\n", admissible_probability(0.5, table));
  if (enumerate) {
    out << "config,class,representative,admissible\n";
    for (int b = 0; b < HexConfig::kCount; ++b) {
      const HexConfig c{static_cast<std::uint8_t>(b)};
      const int id = canonicalize(c);
      fmt::print(out, "{},{},{},{}\n", to_string(c), id, to_string(reps[static_cast<std::size_t>(id)]),
                 table.admissible(c) ? "yes" : "no");
    }
  }
  return kExitOk;
}

struct CheckArgs {
  MediumOptions medium;
  int radius = 10;
  long long steps = 0;
  std::string table = "adjacent";
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  if (a.radius < 0) throw UsageError("--radius must be non-negative");
  if (a.steps < 0) throw UsageError("--steps must be non-negative");
  const ClassTable table = resolve_table(a.table);
  Medium medium(medium_spec(a.medium));
  if (a.steps > 0) run(medium, a.steps);
  std::vector<FaceCoord> faces;
  for (int i = -a.radius; i <= a.radius; ++i) {
    for (int j = -a.radius; j <= a.radius; ++j) faces.push_back({i, j});
  }
  const RegionCheck check = is_admissible_region(medium, faces, table);
  if (check.admissible) {
    fmt::print(out, "admissible faces={} table={}\n", faces.size(), table.name());
  } else {
    const HexConfig c = face_config(medium, *check.offending);
    fmt::print(out, "nonadmissible face={} config={} class={}\n", to_string(*check.offending), to_string(c),
               to_string(class_representatives()[static_cast<std::size_t>(canonicalize(c))]));
  }
  return kExitOk;
}

struct PlotArgs {
  std::string csv, trajectory, events, svg, x = "t", title;
  std::vector<std::string> ys;
  bool log_x = false, log_y = false;
};

int cmd_plot(const PlotArgs& a) {
  if (a.csv.empty() == a.trajectory.empty()) throw UsageError("plot takes exactly one of --csv or --trajectory");
  std::string svg;
  if (!a.trajectory.empty()) {
    const std::string events = a.events.empty() ? std::string() : read_file(a.events);
    svg = render_trajectory(read_file(a.trajectory), events);
  } else {
    if (a.ys.empty()) throw UsageError("plot --csv needs at least one --y column");
    svg = render_chart(read_file(a.csv), a.x, a.ys, {a.title, a.x, a.ys.front(), a.log_x, a.log_y});
  }
  write_file(a.svg, svg);
  return kExitOk;
}

}  // namespace

long long default_step_cap(const char* env_value) {
  if (env_value == nullptr || *env_value == '\0') return kDefaultStepCap;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(env_value, &end, 10);
  if (errno != 0 || *end != '\0' || v < 0) {
    throw UsageError(fmt::format("{}='{}' is not a non-negative integer", kStepCapEnv, env_value));
  }
  return v;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad grid value '{}'", cell));
    }
    if (used != cell.size()) throw UsageError(fmt::format("bad grid value '{}'", cell));
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty --grid");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle among flipping rotators on the honeycomb lattice", "rotorwalk"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate one trajectory");
  add_medium_options(run_cmd, run_args.medium, true);
  run_cmd->add_option("--steps", run_args.steps, "Step cap");
  run_cmd->add_option("--events", run_args.events, "Structure events (JSON lines)");
  run_cmd->add_option("--trajectory", run_args.trajectory, "Positions (CSV)");
  run_cmd->add_option("--csv", run_args.csv, "Squared displacement per step (CSV)");
  run_cmd->add_option("--svg", run_args.svg, "Trajectory plot");
  run_cmd->add_option("--snapshot", run_args.snapshot, "Final orientations of touched sites");

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble", "Run independent realizations");
  add_medium_options(ens_cmd, ens.medium, false);
  ens_cmd->add_option("--steps", ens.steps, "Step cap per realization");
  ens_cmd->add_option("--realizations", ens.realizations, "Number of realizations");
  ens_cmd->add_option("--threads", ens.threads, "Worker threads (0 = all cores)");
  ens_cmd->add_option("--observable", ens.observable, "periods or msd")
      ->check(CLI::IsMember({"periods", "msd"}));
  ens_cmd->add_option("--horizon", ens.horizon, "Time horizon for msd");
  ens_cmd->add_option("--every", ens.every, "Sampling stride for msd");
  ens_cmd->add_option("--fit", ens.fit, "Power-law fit range: tmin tmax")->expected(2);
  ens_cmd->add_flag("--analyze", ens.analyze, "Count reflectors and annihilations per run");
  ens_cmd->add_option("--csv", ens.csv, "Output CSV (default: stdout)");
  ens_cmd->add_option("--svg", ens.svg, "Chart of the CSV");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Average period over a grid of p");
  add_medium_options(sweep_cmd, sw.medium, false);
  sweep_cmd->add_option("--grid", sw.grid, "Comma-separated p values")->required();
  sweep_cmd->add_option("--steps", sw.steps, "Step cap per realization");
  sweep_cmd->add_option("--realizations", sw.realizations, "Realizations per p");
  sweep_cmd->add_option("--threads", sw.threads, "Worker threads (0 = all cores)");
  sweep_cmd->add_option("--csv", sw.csv, "Output CSV (default: stdout)");
  sweep_cmd->add_option("--svg", sw.svg, "Chart of the CSV");

  std::string classify_table = "adjacent";
  bool enumerate = false;
  auto* classify_cmd = app.add_subcommand("classify-hex", "List hexagon classes");
  classify_cmd->add_option("--table", classify_table, "adjacent, meta, or a table file");
  classify_cmd->add_flag("--enumerate", enumerate, "Also list all 64 configurations");

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check-admissible", "Check faces around the origin");
  add_medium_options(check_cmd, check.medium, true);
  check_cmd->add_option("--radius", check.radius, "Faces F(i,j) with |i|,|j| <= radius");
  check_cmd->add_option("--steps", check.steps, "Advance the particle first");
  check_cmd->add_option("--table", check.table, "adjacent, meta, or a table file");

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render a CSV as SVG");
  plot_cmd->add_option("--csv", plot.csv, "Input CSV for a line chart");
  plot_cmd->add_option("--trajectory", plot.trajectory, "Input trajectory CSV");
  plot_cmd->add_option("--events", plot.events, "Events for reflector markers");
  plot_cmd->add_option("--svg", plot.svg, "Output SVG")->required();
  plot_cmd->add_option("--x", plot.x, "x column");
  plot_cmd->add_option("--y", plot.ys, "y column (repeatable)");
  plot_cmd->add_option("--title", plot.title, "Chart title");
  plot_cmd->add_flag("--log-x", plot.log_x, "Logarithmic x axis");
  plot_cmd->add_flag("--log-y", plot.log_y, "Logarithmic y axis");

  std::vector<const char*> argv;
  argv.push_back("rotorwalk");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_args, out);
    if (*ens_cmd) return cmd_ensemble(ens, out);
    if (*sweep_cmd) return cmd_sweep(sw, out);
    if (*classify_cmd) return cmd_classify(classify_table, enumerate, out);
    if (*check_cmd) return cmd_check(check, out);
    if (*plot_cmd) return cmd_plot(plot);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SnapshotFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const TableFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CsvFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace rotorwalk::cli
