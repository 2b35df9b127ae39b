#include "arvar/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "arvar/rng.hpp"

namespace arvar {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}


}  // namespace

std::string to_string(DatasetName name) {
  switch (name) {
    case DatasetName::G: return "G";
    case DatasetName::Y: return "Y";
    case DatasetName::W: return "W";
    case DatasetName::FiveD: return "5D";
    case DatasetName::Custom: return "custom";
  }
  return "custom";
}

DatasetName parse_dataset(const std::string& text) {
  const std::string t = lower(text);
  if (t == "g") return DatasetName::G;
  if (t == "y") return DatasetName::Y;
  if (t == "w") return DatasetName::W;
  if (t == "5d" || t == "fived") return DatasetName::FiveD;
  throw std::invalid_argument("unknown dataset '" + text + "' (expected G, Y, W or 5D)");
}

DatasetSpec builtin_dataset(DatasetName name, std::uint64_t seed) {
  using std::numbers::pi;
  DatasetSpec spec;
  spec.name = name;
  spec.seed = seed;
  switch (name) {
    case DatasetName::G:
      spec.bounds = {{0.0, 1.0}};
      spec.mean_fn = [](std::span<const double> x) { return 2.0 * std::sin(2.0 * pi * x[0]); };
      spec.sigma_fn = [](std::span<const double> x) { return 0.5 * x[0] + 0.5; };
      break;
    case DatasetName::Y:
      spec.bounds = {{0.0, 1.0}};
      spec.mean_fn = [](std::span<const double> x) {
        const double d = x[0] - 0.25;
        return 2.0 * (std::exp(-30.0 * d * d) + std::sin(pi * x[0] * x[0])) - 2.0;
      };
      spec.sigma_fn = [](std::span<const double> x) {
        return std::exp(std::sin(2.0 * pi * x[0])) / 3.0;
      };
      break;
    case DatasetName::W:
      spec.bounds = {{0.0, pi}};
      spec.mean_fn = [](std::span<const double> x) {
        return std::sin(2.5 * x[0]) * std::sin(1.5 * x[0]);
      };
      spec.sigma_fn = [](std::span<const double> x) {
        const double s = 1.0 - std::sin(2.5 * x[0]);
        return 0.01 + 0.25 * s * s;
      };
      break;
    case DatasetName::FiveD:
      spec.n_train = 10000;
      spec.bounds.assign(5, {0.0, 1.0});
      spec.exact_mean = true;
      spec.mean_fn = [](std::span<const double>) { return 0.0; };
      spec.sigma_fn = [](std::span<const double> x) {
        double sum = 0.0;
        for (double v : x) sum += 5.0 * v;
        return 0.45 * (std::cos(pi + sum) + 1.2);
      };
      break;
    case DatasetName::Custom:
      throw std::invalid_argument("builtin_dataset: 'custom' has no built-in definition");
  }
  return spec;
}

Dataset generate(const DatasetSpec& spec) { return generate(spec, spec.n_train, spec.seed); }

Dataset generate(const DatasetSpec& spec, std::size_t n, std::uint64_t seed) {
  if (spec.bounds.empty() || !spec.mean_fn || !spec.sigma_fn) {
    throw std::invalid_argument("generate: dataset spec is incomplete");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data;
  data.inputs.resize(n);
  data.targets.resize(n);
  data.true_mean.resize(n);
  data.true_sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& x = data.inputs[i];
    x.resize(spec.dim());
    for (std::size_t j = 0; j < spec.dim(); ++j) {
      const auto [lo, hi] = spec.bounds[j];
      x[j] = lo + (hi - lo) * unit(rng);
    }
    data.true_mean[i] = spec.mean_fn(x);
    data.true_sigma[i] = spec.sigma_fn(x);
    data.targets[i] = data.true_mean[i] + data.true_sigma[i] * normal(rng);
  }
  return data;
}

double nlpd(std::span<const ForecastTriple> triples) {
  if (triples.empty()) throw std::domain_error("nlpd: no forecasts");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double sum = 0.0;
  for (const auto& t : triples) {
    const double z = t.error() / t.sigma();
    sum += half_log_2pi + std::log(t.sigma()) + 0.5 * z * z;
  }
  return sum / static_cast<double>(triples.size());
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::domain_error("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return Quartiles{quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::GpHomoskedastic: return "GP";
    case Estimator::ArNn: return "AR-NN";
    case Estimator::ArPoly: return "AR-Poly";
  }
  return "GP";
}

Estimator parse_estimator(const std::string& text) {
  const std::string t = lower(text);
  if (t == "gp") return Estimator::GpHomoskedastic;
  if (t == "ar-nn" || t == "nn") return Estimator::ArNn;
  if (t == "ar-poly" || t == "poly") return Estimator::ArPoly;
  throw std::invalid_argument("unknown estimator '" + text + "' (expected gp, ar-nn or ar-poly)");
}

bool supports(DatasetName dataset, Estimator e, std::size_t dim) {
  if (e == Estimator::ArPoly) return dim == 1;
  // A full GP on the 10^4-point 5D training set is out of desk-scale reach and
  // the mean there is exact anyway.
  if (e == Estimator::GpHomoskedastic) return dataset != DatasetName::FiveD;
  return true;
}

std::vector<double> ExperimentReport::nlpd_values() const {
  std::vector<double> v;
  for (const auto& r : runs) {
    if (r.ok) v.push_back(r.nlpd);
  }
  return v;
}

std::uint64_t run_seed(std::uint64_t master, DatasetName dataset, std::size_t run) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(dataset) + 101), run);
}

namespace {

struct MeanModel {
  std::optional<GpModel> gp;
  PointFn exact;

  double operator()(std::span<const double> x) const { return gp ? gp->predict_mean(x) : exact(x); }
};

std::vector<ErrorSample> residuals(const Dataset& train, const MeanModel& mean) {
  std::vector<ErrorSample> out(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    out[i].x = train.inputs[i];
    out[i].eps = train.targets[i] - mean(train.inputs[i]);
  }
  return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

RunRecord one_run(const DatasetSpec& spec, Estimator estimator, const ExperimentOptions& opts,
                  std::size_t run, const std::vector<double>& grid) {
  RunRecord rec;
  rec.run = run;
  rec.seed = run_seed(opts.master_seed, spec.name, run);
  const auto start = std::chrono::steady_clock::now();

  const Dataset train = generate(spec, spec.n_train, rec.seed);
  const Dataset test = generate(spec, opts.n_test, derive_seed(rec.seed, 1));

  MeanModel mean;
  if (spec.exact_mean) {
    mean.exact = spec.mean_fn;
  } else {
    GpFitOptions gopts = opts.gp;
    gopts.seed = derive_seed(rec.seed, 2);
    auto fit = gp_fit(to_matrix(train.inputs),
                      Eigen::Map<const Eigen::VectorXd>(train.targets.data(),
                                                        static_cast<Eigen::Index>(train.size())),
                      gopts);
    rec.mean_hyper = fit.model.hyperparameters();
    mean.gp = std::move(fit.model);
  }

  std::function<double(std::span<const double>)> sigma_of;
  switch (estimator) {
    case Estimator::GpHomoskedastic: {
      if (!mean.gp) throw std::invalid_argument("GP estimator needs a fitted GP mean");
      const GpModel* gp = &*mean.gp;
      sigma_of = [gp](std::span<const double> x) { return std::sqrt(gp->predict_variance(x)); };
      break;
    }
    case Estimator::ArPoly: {
      PolyFitOptions popts = opts.poly;
      popts.drop_constant = opts.drop_constant;
      PolyFit fit = fit_polynomial(residuals(train, mean), popts);
      rec.model = fit.model;
      sigma_of = [m = fit.model](std::span<const double> x) { return predict_sigma(m, x); };
      break;
    }
    case Estimator::ArNn: {
      MlpFitOptions mopts = opts.mlp;
      mopts.drop_constant = opts.drop_constant;
      MlpFit fit = fit_mlp(residuals(train, mean), mopts, derive_seed(rec.seed, 3));
      rec.model = fit.model;
      sigma_of = [m = fit.model](std::span<const double> x) { return predict_sigma(m, x); };
      break;
    }
  }

  std::vector<ForecastTriple> triples;
  triples.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    triples.emplace_back(mean(test.inputs[i]), sigma_of(test.inputs[i]), test.targets[i]);
  }
  rec.nlpd = nlpd(triples);

  rec.sigma_grid.reserve(grid.size());
  for (double x : grid) {
    const double xs[1] = {x};
    rec.sigma_grid.push_back(sigma_of(xs));
  }
  rec.ok = true;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

ExperimentReport run_experiment(const DatasetSpec& spec, Estimator estimator,
                                const ExperimentOptions& opts) {
  if (!supports(spec.name, estimator, spec.dim())) {
    throw std::invalid_argument("run_experiment: " + to_string(estimator) +
                                " is not supported on dataset " + to_string(spec.name));
  }
  if (opts.n_runs == 0 || opts.n_test == 0) {
    throw std::invalid_argument("run_experiment: need at least one run and one test point");
  }
  ExperimentReport report;
  report.dataset = spec.name;
  report.estimator = estimator;

  if (spec.dim() == 1 && opts.grid_points >= 2) {
    const auto [lo, hi] = spec.bounds[0];
    for (std::size_t k = 0; k < opts.grid_points; ++k) {
      const double x = lo + (hi - lo) * static_cast<double>(k) /
                                static_cast<double>(opts.grid_points - 1);
      report.grid_x.push_back(x);
      const double xs[1] = {x};
      report.sigma_true.push_back(spec.sigma_fn(xs));
    }
  }

  for (std::size_t r = 0; r < opts.n_runs; ++r) {
    try {
      report.runs.push_back(one_run(spec, estimator, opts, r, report.grid_x));
    } catch (const std::exception& e) {
      RunRecord failed;
      failed.run = r;
      failed.seed = run_seed(opts.master_seed, spec.name, r);
      failed.error = e.what();
      report.runs.push_back(std::move(failed));
    }
  }

  const std::vector<double> values = report.nlpd_values();
  if (!values.empty()) report.nlpd_quartiles = quartiles(values);

  const std::size_t g = report.grid_x.size();
  report.sigma_mean.assign(g, 0.0);
  report.sigma_std.assign(g, 0.0);
  std::size_t ok = 0;
  for (const auto& r : report.runs) {
    if (!r.ok) continue;
    ++ok;
    for (std::size_t k = 0; k < g; ++k) report.sigma_mean[k] += r.sigma_grid[k];
  }
  if (ok > 0) {
    for (auto& m : report.sigma_mean) m /= static_cast<double>(ok);
    for (const auto& r : report.runs) {
      if (!r.ok) continue;
      for (std::size_t k = 0; k < g; ++k) {
        const double d = r.sigma_grid[k] - report.sigma_mean[k];
        report.sigma_std[k] += d * d;
      }
    }
    for (auto& s : report.sigma_std) s = std::sqrt(s / static_cast<double>(ok));
  }
  return report;
}

RecoverySummary sigma_recovery(std::span<const double> sigma_true,
                               std::span<const double> sigma_mean,
                               std::span<const double> sigma_std) {
  if (sigma_true.size() != sigma_mean.size() || sigma_true.size() != sigma_std.size()) {
    throw std::invalid_argument("sigma_recovery: grid lengths differ");
  }
  if (sigma_true.empty()) throw std::invalid_argument("sigma_recovery: empty grid");
  RecoverySummary s;
  std::size_t inside = 0;
  for (std::size_t k = 0; k < sigma_true.size(); ++k) {
    const double dev = std::abs(sigma_mean[k] - sigma_true[k]);
    s.mad += dev;
    if (dev <= 2.0 * sigma_std[k]) ++inside;
  }
  s.mad /= static_cast<double>(sigma_true.size());
  s.coverage = static_cast<double>(inside) / static_cast<double>(sigma_true.size());
  return s;
}

RecoverySummary sigma_recovery(const ExperimentReport& report) {
  return sigma_recovery(report.sigma_true, report.sigma_mean, report.sigma_std);
}

double run_mad(const RunRecord& run, std::span<const double> sigma_true) {
  if (run.sigma_grid.size() != sigma_true.size() || sigma_true.empty()) {
    throw std::invalid_argument("run_mad: grid lengths differ");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < sigma_true.size(); ++k) sum += std::abs(run.sigma_grid[k] - sigma_true[k]);
  return sum / static_cast<double>(sigma_true.size());
}

double DensityMap::bin_center(std::size_t b) const noexcept {
  return lo + (hi - lo) * (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_correlation: need two equal-length samples");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

DensityMap density_map(const PointFn& predict, const DatasetSpec& spec, std::size_t n_samples,
                       std::uint64_t seed, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("density_map: need at least one bin");
  DensityMap map;
  map.bins = bins;
  map.lo = 0.0;
  map.hi = 1.0;
  map.counts.assign(bins * bins, 0.0);
  const Dataset samples = generate(spec, n_samples, seed);
  std::vector<double> pred(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) pred[i] = predict(samples.inputs[i]);

  auto bin_of = [&](double v) {
    const double t = (v - map.lo) / (map.hi - map.lo) * static_cast<double>(bins);
    return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(bins) - 1.0));
  };
  for (std::size_t i = 0; i < n_samples; ++i) {
    map.counts[bin_of(pred[i]) * bins + bin_of(samples.true_sigma[i])] += 1.0;
  }
  map.density = map.counts;
  for (std::size_t c = 0; c < bins; ++c) {
    double mx = 0.0;
    for (std::size_t r = 0; r < bins; ++r) mx = std::max(mx, map.counts[c * bins + r]);
    if (mx > 0.0) {
      for (std::size_t r = 0; r < bins; ++r) map.density[c * bins + r] /= mx;
    }
  }
  map.samples = n_samples;
  map.pearson = n_samples >= 2 ? pearson_correlation(pred, samples.true_sigma) : 0.0;
  return map;
}

DensityMap density_plot_5d(const MlpModel& model, std::size_t n_samples, std::uint64_t seed,
                           std::size_t bins) {
  if (model.input_dim() != 5) throw std::domain_error("density_plot_5d: model must take 5 inputs");
  return density_map([&model](std::span<const double> x) { return predict_sigma(model, x); },
                     builtin_dataset(DatasetName::FiveD), n_samples, seed, bins);
}

double diagonal_peak_fraction(const DensityMap& map, double tol) {
  std::size_t populated = 0, near = 0;
  for (std::size_t c = 0; c < map.bins; ++c) {
    std::size_t arg = 0;
    double mx = 0.0;
    for (std::size_t r = 0; r < map.bins; ++r) {
      if (map.counts[c * map.bins + r] > mx) {
        mx = map.counts[c * map.bins + r];
        arg = r;
      }
    }
    if (mx == 0.0) continue;
    ++populated;
    if (std::abs(map.bin_center(c) - map.bin_center(arg)) <= tol + 1e-12) ++near;
  }
  return populated == 0 ? 0.0 : static_cast<double>(near) / static_cast<double>(populated);
}

void write_runs_csv(std::ostream& out, std::span<const ExperimentReport> reports,
                    bool with_timing) {
  out << "dataset,estimator,run,seed,nlpd,status";
  if (with_timing) out << ",wall_time_s";
  out << '\n';
  for (const auto& rep : reports) {
    for (const auto& r : rep.runs) {
      out << to_string(rep.dataset) << ',' << to_string(rep.estimator) << ',' << r.run << ','
          << r.seed << ',' << (r.ok ? fixed(r.nlpd, 6) : std::string("NA")) << ','
          << (r.ok ? "ok" : "failed");
      if (with_timing) out << ',' << fixed(r.wall_seconds, 3);
      out << '\n';
    }
  }
}

void write_table_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  const Estimator columns[] = {Estimator::GpHomoskedastic, Estimator::ArNn, Estimator::ArPoly};
  std::vector<DatasetName> datasets;
  for (const auto& r : reports) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }
  out << "dataset,statistic,GP,AR-NN,AR-Poly\n";
  const char* labels[] = {"1st quartile", "median", "3rd quartile"};
  for (DatasetName d : datasets) {
    for (int row = 0; row < 3; ++row) {
      out << to_string(d) << ',' << labels[row];
      for (Estimator e : columns) {
        const ExperimentReport* cell = nullptr;
        for (const auto& r : reports) {
          if (r.dataset == d && r.estimator == e) cell = &r;
        }
        out << ',';
        if (cell && !cell->nlpd_values().empty()) {
          const Quartiles& q = cell->nlpd_quartiles;
          out << fixed(row == 0 ? q.q1 : row == 1 ? q.median : q.q3, 4);
        } else {
          out << "NA";
        }
      }
      out << '\n';
    }
  }
}

void write_recovery_csv(std::ostream& out, const ExperimentReport& report) {
  out << "x,sigma_true,sigma_mean,sigma_std\n";
  for (std::size_t k = 0; k < report.grid_x.size(); ++k) {
    out << fixed(report.grid_x[k], 6) << ',' << fixed(report.sigma_true[k], 6) << ','
        << fixed(report.sigma_mean[k], 6) << ',' << fixed(report.sigma_std[k], 6) << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityMap& map) {
  out << "sigma_pred,sigma_true,count,density\n";
  for (std::size_t c = 0; c < map.bins; ++c) {
    for (std::size_t r = 0; r < map.bins; ++r) {
      out << fixed(map.bin_center(c), 4) << ',' << fixed(map.bin_center(r), 4) << ','
          << static_cast<long long>(map.counts[c * map.bins + r]) << ','
          << fixed(map.density[c * map.bins + r], 6) << '\n';
    }
  }
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t d = data.inputs.empty() ? 0 : data.inputs[0].size();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "y,true_mean,true_sigma\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.inputs[i]) out << fixed(v, 10) << ',';
    out << fixed(data.targets[i], 10) << ',' << fixed(data.true_mean[i], 10) << ','
        << fixed(data.true_sigma[i], 10) << '\n';
  }
}

}  // namespace arvar
