#include "rotorwalk/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rotorwalk/structures.hpp"

namespace rotorwalk {

namespace {

unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Calls body(index, worker) for every index in [0, jobs).
template <typename Body>
void parallel_for(std::size_t jobs, unsigned threads, Body body) {
  const unsigned workers = resolve_threads(threads, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < jobs && !failed; i = next++) body(i, w);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class MsdRecorder : public TrajectoryObserver {
 public:
  MsdRecorder(std::span<const std::int64_t> times, std::vector<std::int64_t>& sums)
      : times_(times), sums_(sums) {}

  void on_start(const SimState& initial) override { take(initial); }
  bool on_step(const SimState& state) override {
    take(state);
    return true;
  }

 private:
  void take(const SimState& s) {
    if (next_ < times_.size() && times_[next_] == s.time) sums_[next_++] += squared_norm(s.site);
  }

  std::span<const std::int64_t> times_;
  std::vector<std::int64_t>& sums_;
  std::size_t next_ = 0;
};

std::string opt_field(const std::optional<std::size_t>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::IID: return "iid";
    case ModelKind::Family: return "family";
    case ModelKind::Admissible: return "admissible";
    case ModelKind::AllLeft: return "all-left";
    case ModelKind::AllRight: return "all-right";
  }
  return "unknown";
}

MediumSpec ModelSpec::build(std::uint64_t seed) const {
  switch (kind) {
    case ModelKind::IID: return MediumSpec::iid(p, seed);
    case ModelKind::Family: return MediumSpec::family(example_family(), p, seed);
    case ModelKind::Admissible: return MediumSpec::admissible_hex(p, color_class, seed);
    case ModelKind::AllLeft: return MediumSpec::homogeneous(Orientation::Left);
    case ModelKind::AllRight: return MediumSpec::homogeneous(Orientation::Right);
  }
  throw std::invalid_argument("unknown model kind");
}

ModelSpec ModelSpec::with_p(double value) const {
  ModelSpec m = *this;
  m.p = value;
  return m;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

std::vector<RunRecord> run_ensemble(const EnsembleSpec& spec) {
  std::vector<RunRecord> records(spec.realizations);
  parallel_for(spec.realizations, spec.threads, [&](std::size_t i, unsigned) {
    Medium medium(spec.model.build(derive_seed(spec.master_seed, i)));
    RunRecord& rec = records[i];
    rec.seed_index = i;
    rec.p = spec.model.p;
    RunOutcome outcome;
    if (spec.analyze) {
      TrajectoryAnalyzer analyzer(AnalyzerOptions{false, false});
      TrajectoryObserver* obs[] = {&analyzer};
      outcome = run(medium, spec.step_cap, obs);
      rec.reflectors = analyzer.reflector_count();
      rec.annihilations = analyzer.annihilation_count();
    } else {
      outcome = run(medium, spec.step_cap);
    }
    rec.outcome = outcome.kind;
    rec.steps = outcome.steps;
    rec.origin_returns = outcome.origin_returns.size();
  });
  return records;
}

PeriodSummary summarize_periods(std::span<const RunRecord> runs) {
  std::vector<std::int64_t> periods;
  for (const RunRecord& r : runs) {
    if (r.outcome == OutcomeKind::Periodic) periods.push_back(r.steps);
  }
  if (periods.empty()) throw AllRunsCapped(fmt::format("all {} runs reached the step cap", runs.size()));
  std::sort(periods.begin(), periods.end());
  PeriodSummary s;
  s.n_runs = runs.size();
  s.n_periodic = periods.size();
  s.capped_fraction = static_cast<double>(runs.size() - periods.size()) / static_cast<double>(runs.size());
  long double total = 0;
  for (const auto v : periods) total += v;
  s.mean_period = static_cast<double>(total / periods.size());
  const std::size_t n = periods.size();
  s.median_period = n % 2 ? static_cast<double>(periods[n / 2])
                          : 0.5 * static_cast<double>(periods[n / 2 - 1] + periods[n / 2]);
  return s;
}

PeriodSummary average_period(const EnsembleSpec& spec) {
  const auto runs = run_ensemble(spec);
  return summarize_periods(runs);
}

double censored_median(std::span<const RunRecord> runs) {
  if (runs.empty()) throw std::invalid_argument("censored median of an empty ensemble");
  std::vector<double> v;
  v.reserve(runs.size());
  for (const RunRecord& r : runs) {
    v.push_back(r.outcome == OutcomeKind::Periodic ? static_cast<double>(r.steps)
                                                   : std::numeric_limits<double>::infinity());
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SeriesResult msd_series(const EnsembleSpec& spec) {
  if (spec.msd_horizon < 1) throw std::invalid_argument("msd horizon must be at least 1");
  if (spec.record_every < 1) throw std::invalid_argument("record stride must be at least 1");
  SeriesResult out;
  out.times = {0, 1};
  for (std::int64_t t = spec.record_every; t <= spec.msd_horizon; t += spec.record_every) {
    if (t > 1) out.times.push_back(t);
  }
  if (out.times.back() != spec.msd_horizon) out.times.push_back(spec.msd_horizon);

  const unsigned workers = resolve_threads(spec.threads, spec.realizations);
  std::vector<std::vector<std::int64_t>> partial(workers, std::vector<std::int64_t>(out.times.size(), 0));
  parallel_for(spec.realizations, workers, [&](std::size_t i, unsigned w) {
    Medium medium(spec.model.build(derive_seed(spec.master_seed, i)));
    MsdRecorder recorder(out.times, partial[w]);
    TrajectoryObserver* obs[] = {&recorder};
    run(medium, RunOptions{spec.msd_horizon, false}, obs);
  });

  out.values.resize(out.times.size());
  out.counts.assign(out.times.size(), spec.realizations);
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    std::int64_t total = 0;
    for (const auto& p : partial) total += p[k];
    out.values[k] = spec.realizations ? static_cast<double>(total) / static_cast<double>(spec.realizations) : 0.0;
  }
  return out;
}

PowerLawFit powerlaw_fit(const SeriesResult& series, double t_min, double t_max) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const double t = static_cast<double>(series.times[k]);
    if (t < t_min || t > t_max) continue;
    const double v = series.values[k];
    if (!(t > 0.0) || !(v > 0.0)) {
      throw DegenerateRange(fmt::format("non-positive point (t={}, value={}) in fit range", t, v));
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 3) {
    throw DegenerateRange(fmt::format("{} points in [{}, {}], need at least 3", xs.size(), t_min, t_max));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) throw DegenerateRange("fit range has a single distinct time");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.prefactor = std::exp(intercept);
  double ss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (intercept + fit.exponent * xs[k]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points = xs.size();
  return fit;
}

std::vector<SweepRow> sweep(const EnsembleSpec& base, std::span<const double> grid) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const double p : grid) {
    EnsembleSpec spec = base;
    spec.model = base.model.with_p(p);
    SweepRow row;
    row.p = p;
    row.runs = run_ensemble(spec);
    row.n_runs = row.runs.size();
    try {
      row.summary = summarize_periods(row.runs);
    } catch (const AllRunsCapped&) {
      row.summary.reset();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_periods_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "seed_index,p,outcome,period,origin_returns,reflectors,annihilations\n";
  for (const RunRecord& r : runs) {
    const std::string period = r.outcome == OutcomeKind::Periodic ? fmt::format("{}", r.steps) : "";
    fmt::print(out, "{},{},{},{},{},{},{}\n", r.seed_index, r.p, to_string(r.outcome), period,
               r.origin_returns, opt_field(r.reflectors), opt_field(r.annihilations));
  }
}

void write_msd_csv(std::ostream& out, const SeriesResult& series) {
  out << "t,mean_sq_disp,n\n";
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    fmt::print(out, "{},{},{}\n", series.times[k], series.values[k], series.counts[k]);
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "p,mean_period,median_period,capped_fraction,n_periodic\n";
  for (const SweepRow& r : rows) {
    if (r.summary) {
      fmt::print(out, "{},{},{},{},{}\n", r.p, r.summary->mean_period, r.summary->median_period,
                 r.summary->capped_fraction, r.summary->n_periodic);
    } else {
      fmt::print(out, "{},,,{},0\n", r.p, r.n_runs ? 1.0 : 0.0);
    }
  }
}

}  // namespace rotorwalk
