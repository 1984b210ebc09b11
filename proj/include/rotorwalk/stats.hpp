#pragma once

// Ensembles of independent realizations and their aggregate observables.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotorwalk/dynamics.hpp"
#include "rotorwalk/medium.hpp"

namespace rotorwalk {

enum class ModelKind { IID, Family, Admissible, AllLeft, AllRight };

std::string to_string(ModelKind kind);

/// Medium recipe shared by every realization; only the seed varies.
struct ModelSpec {
  ModelKind kind = ModelKind::IID;
  double p = 0.5;
  int color_class = 0;

  MediumSpec build(std::uint64_t seed) const;
  ModelSpec with_p(double value) const;
};

struct EnsembleSpec {
  ModelSpec model;
  std::size_t realizations = 200;
  std::int64_t step_cap = 10'000'000;
  std::uint64_t master_seed = 0;
  std::int64_t msd_horizon = 3000;
  std::int64_t record_every = 10;
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;
  /// Runs the structure analyzer on each realization (memory grows with the
  /// run length).
  bool analyze = false;
};

/// Seed of realization i, a fixed hash of (master, i).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct RunRecord {
  std::size_t seed_index = 0;
  double p = 0.0;
  OutcomeKind outcome = OutcomeKind::StepCapReached;
  /// Period, or steps taken for capped runs.
  std::int64_t steps = 0;
  std::size_t origin_returns = 0;
  std::optional<std::size_t> reflectors;
  std::optional<std::size_t> annihilations;
};

/// Results are ordered by seed_index regardless of scheduling.
std::vector<RunRecord> run_ensemble(const EnsembleSpec& spec);

class AllRunsCapped : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PeriodSummary {
  double mean_period = 0.0;
  double median_period = 0.0;
  double capped_fraction = 0.0;
  std::size_t n_periodic = 0;
  std::size_t n_runs = 0;
};

/// Mean and median over periodic runs only. Throws AllRunsCapped.
PeriodSummary summarize_periods(std::span<const RunRecord> runs);

PeriodSummary average_period(const EnsembleSpec& spec);

/// Median over all runs with capped runs counted as +infinity.
double censored_median(std::span<const RunRecord> runs);

struct SeriesResult {
  std::vector<std::int64_t> times;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  std::optional<PeriodSummary> summary;
  std::optional<double> fit_exponent;
};

/// Mean squared displacement at t = 0, 1, every record_every steps, and the
/// horizon. Periodic runs keep evolving up to the horizon.
SeriesResult msd_series(const EnsembleSpec& spec);

class DegenerateRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  /// RMS deviation of log(value) from the fitted line.
  double residual = 0.0;
  std::size_t points = 0;
};

/// Least squares of log(value) against log(t) over t in [t_min, t_max].
PowerLawFit powerlaw_fit(const SeriesResult& series, double t_min, double t_max);

struct SweepRow {
  double p = 0.0;
  std::optional<PeriodSummary> summary;
  std::size_t n_runs = 0;
  std::vector<RunRecord> runs;
};

std::vector<SweepRow> sweep(const EnsembleSpec& base, std::span<const double> grid);

void write_periods_csv(std::ostream& out, std::span<const RunRecord> runs);
void write_msd_csv(std::ostream& out, const SeriesResult& series);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace rotorwalk
