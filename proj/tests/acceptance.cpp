// End-to-end acceptance run. Prints one PASS/FAIL line per criterion, with
// indented detail lines for failed checks, and exits nonzero on failure.
//
// --allow-known-deviations keeps the exit code at zero when the only failed
// checks are the ones listed in kKnownDeviations. Those still print FAIL.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arvar/arcost.hpp"
#include "arvar/bench.hpp"
#include "arvar/rng.hpp"
#include "arvar/scores.hpp"
#include "arvar/varmodel.hpp"
#include "commands.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace arvar;

namespace {

// The homoskedastic GP beats the reference medians on Y and W: its NLPD lies
// below the lower band edge, and no constant-spread forecast reaches the band.
const std::set<std::string> kKnownDeviations = {"band Y GP", "band W GP"};

struct Check {
  std::string key;
  bool ok = true;
  std::string detail;
};

struct Outcome {
  std::string summary;
  std::vector<Check> checks;

  void add(std::string key, bool ok, std::string detail = {}) {
    checks.push_back({std::move(key), ok, std::move(detail)});
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }
std::string fix(double v) { return fmt("%.3f", v); }

// -------------------------------------------------------------------------
// finite-difference gradient checks

struct GradCase {
  std::function<double(const Vector&)> cost;
  std::function<std::vector<double>(const Vector&)> sigmas;
  std::vector<double> eps;
  Vector p;
  Vector grad;
  bool relative_step = false;  ///< step proportional to |p_k| (spreads), else to max(1, |p_k|)
};

std::vector<std::size_t> eta_order(std::span<const double> eps, std::span<const double> sig) {
  std::vector<double> eta(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eta[i] = eps[i] / sig[i];
  std::vector<std::size_t> idx(eps.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return eta[a] < eta[b]; });
  return idx;
}

// Worst relative error of the analytic gradient against a five-point stencil.
// Empty when any stencil point reorders the relative errors (a rank tie).
std::optional<double> worst_fd_error(const GradCase& c) {
  const auto base_order = eta_order(c.eps, c.sigmas(c.p));
  const double gmax = c.grad.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < c.p.size(); ++k) {
    const double h = 1e-4 * (c.relative_step ? std::abs(c.p[k]) : std::max(1.0, std::abs(c.p[k])));
    double f[4];
    const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int j = 0; j < 4; ++j) {
      Vector q = c.p;
      q[k] += offsets[j] * h;
      if (eta_order(c.eps, c.sigmas(q)) != base_order) return std::nullopt;
      f[j] = c.cost(q);
    }
    const double fd = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * h);
    const double denom = std::max(std::abs(c.grad[k]), 1e-3 * gmax);
    if (denom > 0.0) worst = std::max(worst, std::abs(fd - c.grad[k]) / denom);
  }
  return worst;
}

struct GradSuite {
  std::string name;
  double tol;
  std::function<GradCase(std::mt19937_64&)> make;
};

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<ErrorSample> random_samples(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                        double x_hi) {
  std::uniform_real_distribution<double> u(0.0, x_hi);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> amp(0.2, 1.5);
  const double a = amp(rng);
  std::vector<ErrorSample> data(n);
  for (auto& s : data) {
    s.x.resize(dim);
    for (auto& v : s.x) v = u(rng);
    s.eps = a * z(rng);
  }
  return data;
}

std::vector<GradSuite> gradient_suites() {
  std::vector<GradSuite> suites;

  suites.push_back({"ar_grad", 1e-5, [](std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> nd(2, 30);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> s(0.05, 3.0);
    std::bernoulli_distribution drop(0.5);
    const std::size_t n = nd(rng);
    GradCase c;
    c.eps.resize(n);
    c.p.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      c.eps[i] = z(rng);
      c.p[static_cast<Eigen::Index>(i)] = s(rng);
    }
    const bool d = drop(rng);
    const ArWeights w = compute_beta(c.eps, d);
    const auto eps = c.eps;
    c.cost = [eps, w, d](const Vector& q) { return ar_cost(to_std(q), eps, w, d); };
    c.sigmas = [](const Vector& q) { return to_std(q); };
    const auto g = ar_grad(to_std(c.p), eps, w, d);
    c.grad = Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(n));
    c.relative_step = true;
    return c;
  }});

  suites.push_back({"param_grad per-point", 1e-4, [](std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> nd(1, 40);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t n = nd(rng);
    GradCase c;
    c.eps.resize(n);
    c.p.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      c.eps[i] = z(rng);
      c.p[static_cast<Eigen::Index>(i)] = 0.5 * z(rng);
    }
    const ArWeights w = compute_beta(c.eps, true);
    const auto eps = c.eps;
    c.cost = [eps, w](const Vector& q) { return param_grad(PerPointModel(to_std(q)), eps, w).value; };
    c.sigmas = [](const Vector& q) {
      std::vector<double> s(static_cast<std::size_t>(q.size()));
      for (Eigen::Index i = 0; i < q.size(); ++i) s[static_cast<std::size_t>(i)] = std::exp(q[i]);
      return s;
    };
    c.grad = param_grad(PerPointModel(to_std(c.p)), eps, w).grad;
    return c;
  }});

  suites.push_back({"param_grad polynomial", 1e-4, [](std::mt19937_64& rng) {
    std::uniform_int_distribution<int> od(0, 6);
    std::uniform_real_distribution<double> t0(0.5, 1.5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int order = od(rng);
    const double x_scale = 2.0;
    auto data = random_samples(rng, 50, 1, x_scale);
    std::vector<double> th(static_cast<std::size_t>(order) + 1);
    th[0] = t0(rng);
    // keep the raw polynomial well above the positivity guard
    for (int l = 1; l <= order; ++l) th[static_cast<std::size_t>(l)] = 0.3 * u(rng) / order;
    GradCase c;
    c.eps = errors_of(data);
    const ArWeights w = compute_beta(c.eps, true);
    c.p = Eigen::Map<const Vector>(th.data(), static_cast<Eigen::Index>(th.size()));
    c.cost = [data, w, x_scale](const Vector& q) {
      return param_grad(PolynomialModel(to_std(q), x_scale), data, w).value;
    };
    c.sigmas = [data, x_scale](const Vector& q) {
      const PolynomialModel m(to_std(q), x_scale);
      std::vector<double> s(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) s[i] = predict_sigma(m, data[i].x[0]);
      return s;
    };
    c.grad = param_grad(PolynomialModel(th, x_scale), data, w).grad;
    return c;
  }});

  suites.push_back({"param_grad network", 1e-4, [](std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dd(1, 5);
    const std::size_t dim = dd(rng);
    auto data = random_samples(rng, 40, dim, 1.0);
    MlpModel m(dim);
    m.set_parameters(mlp_initial_parameters(dim, rng()));
    GradCase c;
    c.eps = errors_of(data);
    const ArWeights w = compute_beta(c.eps, true);
    c.p = m.parameters();
    const Eigen::MatrixXd x = input_matrix(data);
    c.cost = [data, w, m](const Vector& q) {
      MlpModel t = m;
      t.set_parameters(q);
      return param_grad(t, data, w).value;
    };
    c.sigmas = [x, m](const Vector& q) {
      MlpModel t = m;
      t.set_parameters(q);
      return t.sigmas(x);
    };
    c.grad = param_grad(m, data, w).grad;
    return c;
  }});

  return suites;
}

// -------------------------------------------------------------------------
// criteria

Outcome crps_vs_quadrature() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mu(-5.0, 5.0), sig(0.05, 5.0), eps(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double m = mu(rng);
    const ForecastTriple t(m, sig(rng), m + eps(rng));
    worst = std::max(worst, std::abs(crps_gaussian(t) - oracle::crps_quadrature(t)));
  }
  Outcome o;
  o.summary = "CRPS closed form vs quadrature, 1000 triples, max |diff| " + sci(worst);
  o.add("max error", worst <= 1e-7, "max |diff| " + sci(worst) + " > 1e-7");
  return o;
}

Outcome rs_vs_quadrature() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> nd(1, 100);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.3, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> etas(nd(rng));
    const double s = spread(rng);
    for (auto& e : etas) e = s * z(rng);
    std::sort(etas.begin(), etas.end());
    const double analytic = reliability_score(RelativeErrorSet(etas), false);
    worst = std::max(worst, std::abs(analytic - oracle::rs_quadrature(etas)));
  }
  Outcome o;
  o.summary = "RS closed form vs quadrature, 200 sets, max |diff| " + sci(worst);
  o.add("max error", worst <= 1e-6, "max |diff| " + sci(worst) + " > 1e-6");
  return o;
}

Outcome minimizer_identities() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.001, 5.0);
  std::bernoulli_distribution neg(0.5);
  double worst_d = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double e = neg(rng) ? -u(rng) : u(rng);
    const double s = std::abs(e) / std::sqrt(std::log(2.0));
    worst_d = std::max(worst_d, std::abs(crps_dsigma(ForecastTriple(0.0, s, e))));
  }
  o.add("crps stationary", worst_d <= 1e-12, "max |dCRPS/dsigma| " + sci(worst_d));

  double worst_rs = 0.0;
  for (std::size_t n : {1u, 2u, 10u, 100u, 10000u}) {
    for (bool drop : {true, false}) {
      const double rs = reliability_score(RelativeErrorSet(rs_optimal_etas(n)), drop);
      worst_rs = std::max(worst_rs, std::abs(rs - rs_min(n, drop)));
    }
  }
  o.add("rs optimum", worst_rs <= 1e-12, "max |RS(optimal) - rs_min| " + sci(worst_rs));

  const double big = rs_min(10000, true);
  o.add("rs_min large N", std::abs(big - 0.399) <= 0.01, "rs_min(1e4) = " + fix(big));

  o.summary = "minimizer identities, max |dCRPS/dsigma| " + sci(worst_d) + ", max RS gap " +
              sci(worst_rs) + ", rs_min(1e4) " + fmt("%.4f", big);
  return o;
}

Outcome gradient_suite() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::ostringstream summary;
  summary << "gradients vs finite differences:";
  for (const auto& suite : gradient_suites()) {
    int checked = 0, skipped = 0;
    double worst = 0.0;
    while (checked < 50) {
      const auto c = suite.make(rng);
      const auto err = worst_fd_error(c);
      if (!err) {
        if (++skipped > 500) break;
        continue;
      }
      ++checked;
      worst = std::max(worst, *err);
    }
    summary << " " << suite.name << " " << sci(worst) << " (" << skipped << " tie skips);";
    o.add(suite.name, checked == 50 && worst <= suite.tol,
          suite.name + ": worst relative error " + sci(worst) + " over " + std::to_string(checked) +
              " instances, tolerance " + sci(suite.tol));
  }
  o.summary = summary.str();
  return o;
}

Outcome conflict_property() {
  std::mt19937_64 rng(105);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 5;
  double smallest = std::numeric_limits<double>::infinity();
  int sets = 0;
  while (sets < 100) {
    std::vector<double> eps(n), mag(n);
    for (std::size_t i = 0; i < n; ++i) {
      eps[i] = z(rng);
      mag[i] = std::abs(eps[i]);
    }
    std::sort(mag.begin(), mag.end());
    bool distinct = mag[0] > 1e-6;
    for (std::size_t i = 0; i + 1 < n; ++i) distinct = distinct && mag[i + 1] - mag[i] > 1e-6;
    if (!distinct) continue;
    ++sets;
    std::vector<double> sig(n);
    for (std::size_t i = 0; i < n; ++i) sig[i] = std::abs(eps[i]) / std::sqrt(std::log(2.0));
    const auto set = RelativeErrorSet::from_errors(eps, sig);
    smallest = std::min(smallest, reliability_score(set, false) - rs_min(n, false));
  }
  Outcome o;
  o.summary = "CRPS-optimal spreads are unreliable, min RS - rs_min over 100 sets " + sci(smallest);
  o.add("gap", smallest > 1e-6, "min RS - rs_min(5) = " + sci(smallest));
  return o;
}

struct Band {
  DatasetName dataset;
  Estimator estimator;
  double lo, hi;
};

const std::vector<Band> kBands = {
    {DatasetName::G, Estimator::GpHomoskedastic, 1.10, 1.45},
    {DatasetName::G, Estimator::ArNn, 1.10, 1.45},
    {DatasetName::G, Estimator::ArPoly, 1.05, 1.35},
    {DatasetName::Y, Estimator::GpHomoskedastic, 1.20, 2.10},
    {DatasetName::Y, Estimator::ArNn, 0.42, 0.80},
    {DatasetName::Y, Estimator::ArPoly, 0.32, 0.62},
    {DatasetName::W, Estimator::GpHomoskedastic, 1.00, 2.60},
    {DatasetName::W, Estimator::ArNn, -0.25, 0.30},
    {DatasetName::W, Estimator::ArPoly, -0.05, 0.45},
};

using ReportKey = std::pair<DatasetName, Estimator>;

Outcome table_reproduction(std::uint64_t seed, const fs::path& out_dir,
                           std::map<ReportKey, ExperimentReport>& reports) {
  ExperimentOptions opts;
  opts.n_runs = 20;
  opts.n_test = 900;
  opts.master_seed = seed;
  std::vector<ExperimentReport> all;
  for (auto d : {DatasetName::G, DatasetName::Y, DatasetName::W}) {
    for (auto e : {Estimator::GpHomoskedastic, Estimator::ArNn, Estimator::ArPoly}) {
      auto rep = run_experiment(builtin_dataset(d), e, opts);
      reports[{d, e}] = rep;
      all.push_back(std::move(rep));
    }
  }
  std::ofstream(out_dir / "table1.csv") << [&] {
    std::ostringstream s;
    write_table_csv(s, all);
    return s.str();
  }();

  Outcome o;
  int in_band = 0;
  for (const auto& b : kBands) {
    const auto& rep = reports.at({b.dataset, b.estimator});
    const std::string cell = to_string(b.dataset) + " " + to_string(b.estimator);
    const bool any = !rep.nlpd_values().empty();
    const double med = rep.nlpd_quartiles.median;
    const bool ok = any && med >= b.lo && med <= b.hi;
    in_band += ok;
    o.add("band " + cell, ok,
          cell + " median " + (any ? fix(med) : std::string("n/a")) + " outside [" + fmt("%.2f", b.lo) +
              ", " + fmt("%.2f", b.hi) + "]");
  }
  for (auto d : {DatasetName::Y, DatasetName::W}) {
    const double nn = reports.at({d, Estimator::ArNn}).nlpd_quartiles.median;
    const double gp = reports.at({d, Estimator::GpHomoskedastic}).nlpd_quartiles.median;
    o.add("order " + to_string(d), nn < gp,
          to_string(d) + ": AR-NN median " + fix(nn) + " not below GP " + fix(gp));
  }
  std::ostringstream s;
  s << "NLPD medians, " << in_band << "/9 in band:";
  for (auto d : {DatasetName::G, DatasetName::Y, DatasetName::W}) {
    s << " " << to_string(d);
    for (auto e : {Estimator::GpHomoskedastic, Estimator::ArNn, Estimator::ArPoly}) {
      s << (e == Estimator::GpHomoskedastic ? " " : "/") << fix(reports.at({d, e}).nlpd_quartiles.median);
    }
  }
  o.summary = s.str();
  return o;
}

Outcome sigma_recovery_check(const std::map<ReportKey, ExperimentReport>& reports) {
  Outcome o;
  std::ostringstream s;
  s << "sigma recovery (MAD, coverage):";
  for (auto d : {DatasetName::G, DatasetName::Y}) {
    for (auto e : {Estimator::ArPoly, Estimator::ArNn}) {
      const auto r = sigma_recovery(reports.at({d, e}));
      const std::string cell = to_string(d) + " " + to_string(e);
      s << " " << cell << " " << fix(r.mad) << "/" << fmt("%.2f", r.coverage) << ";";
      o.add("mad " + cell, r.mad <= 0.1, cell + ": MAD " + fix(r.mad) + " > 0.1");
      o.add("coverage " + cell, r.coverage >= 0.8, cell + ": coverage " + fix(r.coverage) + " < 0.8");
    }
  }
  o.summary = s.str();
  return o;
}

Outcome five_d_density(std::uint64_t seed, const fs::path& out_dir) {
  const DatasetSpec spec = builtin_dataset(DatasetName::FiveD);
  ExperimentOptions opts;
  opts.n_runs = 1;
  opts.master_seed = seed;
  const auto rep = run_experiment(spec, Estimator::ArNn, opts);
  Outcome o;
  o.add("train size", spec.n_train == 10000, "training size " + std::to_string(spec.n_train));
  if (rep.runs.empty() || !rep.runs.front().ok || !rep.runs.front().model) {
    o.add("fit", false, "5D AR-NN fit failed: " + (rep.runs.empty() ? "" : rep.runs.front().error));
    o.summary = "5D density map not computed";
    return o;
  }
  const auto& net = std::get<MlpModel>(*rep.runs.front().model);
  const auto map = density_plot_5d(net, 100000, derive_seed(seed, 0x5d));
  std::ofstream f(out_dir / "density_5d.csv");
  write_density_csv(f, map);
  const double diag = diagonal_peak_fraction(map, 0.15);
  o.add("pearson", map.pearson >= 0.8, "Pearson " + fix(map.pearson) + " < 0.8");
  o.add("diagonal", diag >= 0.7, "diagonal peak fraction " + fix(diag) + " < 0.7");
  o.summary = "5D AR-NN, 1e5 samples: Pearson " + fix(map.pearson) + ", diagonal peak fraction " + fix(diag);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(std::uint64_t seed, const fs::path& out_dir) {
  Outcome o;
  const fs::path dirs[2] = {out_dir / "det_a", out_dir / "det_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    std::ostringstream out, err;
    const int code = cli::main_entry({"bench", "--datasets", "G,Y,W", "--estimators", "gp,ar-nn,ar-poly",
                                      "--runs", "3", "--n-test", "300", "--seed", std::to_string(seed),
                                      "--out-dir", d.string()},
                                     out, err);
    o.add("exit " + d.filename().string(), code == 0, "bench exited with " + std::to_string(code) + ": " + err.str());
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() == ".csv") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  int identical = 0;
  for (const auto& n : names) {
    const std::string a = slurp(dirs[0] / n);
    const bool same = !a.empty() && fs::exists(dirs[1] / n) && a == slurp(dirs[1] / n);
    identical += same;
    o.add("csv " + n, same, n + " differs between runs");
  }
  o.add("csv count", names.size() >= 3, "only " + std::to_string(names.size()) + " CSV files written");
  o.summary = "bench twice with seed " + std::to_string(seed) + ": " + std::to_string(identical) + "/" +
              std::to_string(names.size()) + " CSV files byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string out_dir = "acceptance_out";
  std::uint64_t seed = 0;
  bool allow_known = false;
  std::vector<int> only;
  app.add_option("--out-dir", out_dir, "Directory for CSV artifacts");
  app.add_option("--seed", seed, "Master seed for the benchmark criteria");
  app.add_flag("--allow-known-deviations", allow_known,
               "Do not fail the exit code on the documented known deviations");
  app.add_option("--only", only, "Run only these criteria (1-9)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out_dir);

  std::map<ReportKey, ExperimentReport> reports;
  struct Criterion {
    int id;
    double time_limit_s;  ///< 0: none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 10.0, crps_vs_quadrature},
      {2, 60.0, rs_vs_quadrature},
      {3, 0.0, minimizer_identities},
      {4, 0.0, gradient_suite},
      {5, 0.0, conflict_property},
      {6, 1800.0, [&] { return table_reproduction(seed, out_dir, reports); }},
      {7, 0.0,
       [&] {
         if (reports.empty()) table_reproduction(seed, out_dir, reports);
         return sigma_recovery_check(reports);
       }},
      {8, 900.0, [&] { return five_d_density(seed, out_dir); }},
      {9, 0.0, [&] { return determinism(seed, out_dir); }},
  };

  std::ostringstream report;
  auto emit = [&](const std::string& line) {
    std::cout << line << std::endl;
    report << line << "\n";
  };
  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.summary = "threw";
      o.add("exception", false, e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0) {
      o.add("runtime", secs < c.time_limit_s,
            "runtime " + fmt("%.1f", secs) + " s over the " + fmt("%.0f", c.time_limit_s) + " s limit");
    }
    bool pass = true;
    std::vector<std::string> notes;
    for (const auto& ch : o.checks) {
      if (ch.ok) continue;
      pass = false;
      const bool known = kKnownDeviations.count(ch.key) > 0;
      if (!(known && allow_known)) ++hard_failures;
      notes.push_back(ch.detail + (known ? " [known deviation]" : ""));
    }
    emit(std::string(pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(c.id) + ": " + o.summary +
         " (" + fmt("%.1f", secs) + " s)");
    for (const auto& n : notes) emit("        " + n);
  }
  if (hard_failures > 0) emit(std::to_string(hard_failures) + " failed check(s)");
  std::ofstream(fs::path(out_dir) / "report.txt") << report.str();
  return hard_failures > 0 ? 1 : 0;
}
