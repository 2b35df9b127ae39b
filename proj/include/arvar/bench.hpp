#pragma once

// Synthetic heteroskedastic datasets, evaluation metrics and the multi-run
// experiment protocol used to compare variance estimators.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arvar/meanfn.hpp"
#include "arvar/scores.hpp"
#include "arvar/varmodel.hpp"

namespace arvar {

enum class DatasetName { G, Y, W, FiveD, Custom };

std::string to_string(DatasetName name);
/// Accepts G, Y, W, 5D (case-insensitive). Throws std::invalid_argument.
DatasetName parse_dataset(const std::string& text);

using PointFn = std::function<double(std::span<const double>)>;

struct DatasetSpec {
  DatasetName name = DatasetName::Custom;
  std::size_t n_train = 100;
  std::vector<std::pair<double, double>> bounds;  ///< per input dimension
  PointFn mean_fn;
  PointFn sigma_fn;
  std::uint64_t seed = 0;
  /// Use mean_fn itself as the mean model instead of fitting a GP.
  bool exact_mean = false;

  std::size_t dim() const noexcept { return bounds.size(); }
};

/// The four built-in problems. G, Y and W are 1-D with 100 training points;
/// 5D has 10000 and an exact (zero) mean.
DatasetSpec builtin_dataset(DatasetName name, std::uint64_t seed = 0);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  std::vector<double> true_mean;
  std::vector<double> true_sigma;

  std::size_t size() const noexcept { return targets.size(); }
};

/// Inputs uniform on the domain, targets mean + sigma * z with z ~ N(0, 1).
/// Deterministic in spec.seed.
Dataset generate(const DatasetSpec& spec);
/// Same as generate() with an explicit size and seed.
Dataset generate(const DatasetSpec& spec, std::size_t n, std::uint64_t seed);

/// Mean negative log density, mean of 0.5 log(2 pi sigma^2) + eps^2 / (2 sigma^2).
/// Throws std::domain_error on empty input.
double nlpd(std::span<const ForecastTriple> triples);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Quantile with linear interpolation between order statistics,
/// position (n - 1) * p. Throws std::domain_error on empty input.
double quantile(std::vector<double> values, double p);
Quartiles quartiles(std::span<const double> values);

enum class Estimator { GpHomoskedastic, ArNn, ArPoly };

/// "GP", "AR-NN", "AR-Poly"
std::string to_string(Estimator e);
/// Accepts gp, ar-nn / nn, ar-poly / poly (case-insensitive).
Estimator parse_estimator(const std::string& text);

bool supports(DatasetName dataset, Estimator e, std::size_t dim);

struct ExperimentOptions {
  std::size_t n_runs = 20;
  std::size_t n_test = 900;
  std::uint64_t master_seed = 0;
  std::size_t grid_points = 200;
  bool drop_constant = true;
  MlpFitOptions mlp;
  PolyFitOptions poly;
  GpFitOptions gp;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double nlpd = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> sigma_grid;  ///< fitted sigma on the report's grid (1-D only)
  std::optional<VarianceModel> model;
  std::optional<GpHyperparameters> mean_hyper;
};

struct ExperimentReport {
  DatasetName dataset = DatasetName::Custom;
  Estimator estimator = Estimator::GpHomoskedastic;
  std::vector<RunRecord> runs;
  Quartiles nlpd_quartiles;
  std::vector<double> grid_x;
  std::vector<double> sigma_true;
  std::vector<double> sigma_mean;
  std::vector<double> sigma_std;

  std::vector<double> nlpd_values() const;  ///< successful runs only
};

/// Seed of the training set for run `run` of `dataset`; shared by all
/// estimators so their runs are paired.
std::uint64_t run_seed(std::uint64_t master, DatasetName dataset, std::size_t run);

/// Per run: sample a training set, fit the mean (GP, or exact), fit the
/// variance model on the training residuals, and score NLPD on a fresh test
/// set. Throws std::invalid_argument for an unsupported dataset/estimator pair.
ExperimentReport run_experiment(const DatasetSpec& spec, Estimator estimator,
                                const ExperimentOptions& opts);

struct RecoverySummary {
  double mad = 0.0;       ///< mean |run-averaged sigma - truth| over the grid
  double coverage = 0.0;  ///< fraction of grid with truth inside mean +- 2 std
};

RecoverySummary sigma_recovery(std::span<const double> sigma_true,
                               std::span<const double> sigma_mean,
                               std::span<const double> sigma_std);
RecoverySummary sigma_recovery(const ExperimentReport& report);
/// Mean absolute deviation of a single run's grid from the truth.
double run_mad(const RunRecord& run, std::span<const double> sigma_true);

/// Histogram of (predicted sigma, true sigma) with each predicted-sigma
/// column scaled so its maximum is 1.
struct DensityMap {
  std::size_t bins = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> counts;   ///< counts[pred_bin * bins + true_bin]
  std::vector<double> density;  ///< column-normalized counts
  double pearson = 0.0;
  std::size_t samples = 0;

  double bin_center(std::size_t b) const noexcept;
};

DensityMap density_map(const PointFn& predict, const DatasetSpec& spec, std::size_t n_samples,
                       std::uint64_t seed, std::size_t bins = 50);
DensityMap density_plot_5d(const MlpModel& model, std::size_t n_samples, std::uint64_t seed,
                           std::size_t bins = 50);

/// Fraction of populated columns whose peak lies within `tol` of the diagonal.
double diagonal_peak_fraction(const DensityMap& map, double tol);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

// CSV output. Numbers are printed with fixed precision so that repeated runs
// with the same seed produce identical bytes.
void write_runs_csv(std::ostream& out, std::span<const ExperimentReport> reports,
                    bool with_timing);
void write_table_csv(std::ostream& out, std::span<const ExperimentReport> reports);
void write_recovery_csv(std::ostream& out, const ExperimentReport& report);
void write_density_csv(std::ostream& out, const DensityMap& map);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace arvar
