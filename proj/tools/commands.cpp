#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "arvar/arcost.hpp"
#include "arvar/bench.hpp"
#include "arvar/csv.hpp"
#include "arvar/rng.hpp"
#include "arvar/scores.hpp"
#include "arvar/serialize.hpp"
#include "arvar/svg.hpp"
#include "arvar/varmodel.hpp"

namespace arvar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string estimator_slug(Estimator e) { return lower(to_string(e)); }

std::string canonical_model(const std::string& m) {
  const std::string t = lower(m);
  if (t == "per-point" || t == "perpoint") return "per-point";
  if (t == "poly" || t == "polynomial" || t == "ar-poly") return "poly";
  if (t == "nn" || t == "mlp" || t == "ar-nn") return "nn";
  throw UsageError("unknown model '" + m + "' (expected per-point, poly or nn)");
}

void canonicalize(RunConfig& cfg) {
  try {
    for (auto& d : cfg.datasets) d = to_string(parse_dataset(d));
    for (auto& e : cfg.estimators) e = estimator_slug(parse_estimator(e));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.model = canonical_model(cfg.model);
  if (cfg.runs == 0) throw UsageError("--runs must be positive");
  if (cfg.n_test == 0) throw UsageError("--n-test must be positive");
  if (!(cfg.tol >= 0.0)) throw UsageError("--tol must be non-negative");
}

std::vector<std::string> split_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& item : in) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return read_csv(in);
  } catch (const CsvError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + p.string() + "'");
  return f;
}

// --------------------------------------------------------------------------

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  const CsvTable t = load_csv(cfg.input);
  std::size_t cmu, csig, cy;
  try {
    cmu = t.column("mu");
    csig = t.column("sigma");
    cy = t.column("y_obs");
  } catch (const CsvError& e) {
    throw UsageError(cfg.input + ": " + e.what());
  }
  if (t.rows.empty()) throw UsageError(cfg.input + ": no data rows");

  std::vector<ForecastTriple> triples;
  triples.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    try {
      triples.emplace_back(r[cmu], r[csig], r[cy]);
    } catch (const std::domain_error& e) {
      throw UsageError(cfg.input + ": data row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  std::vector<double> eps, sig;
  double crps = 0.0;
  for (const auto& f : triples) {
    eps.push_back(f.error());
    sig.push_back(f.sigma());
    crps += crps_gaussian(f);
  }
  crps /= static_cast<double>(triples.size());
  const auto set = RelativeErrorSet::from_errors(eps, sig);
  const ArWeights w = compute_beta(eps, cfg.drop_constant);

  const std::vector<std::pair<std::string, double>> rows{
      {"crps", crps},
      {"rs", reliability_score(set, true)},
      {"rs_full", reliability_score(set, false)},
      {"beta", w.beta},
      {"ar", ar_cost(sig, eps, w, cfg.drop_constant)},
      {"nlpd", nlpd(triples)},
  };
  out << "n        " << triples.size() << '\n';
  for (const auto& [k, v] : rows) {
    out << k << std::string(9 - k.size(), ' ') << sig6(v) << '\n';
  }
  if (!cfg.csv.empty()) {
    auto f = open_out(cfg.csv);
    f << "metric,value\n";
    f << "n," << triples.size() << '\n';
    for (const auto& [k, v] : rows) f << k << ',' << sig6(v) << '\n';
  }
  return kOk;
}

// --------------------------------------------------------------------------

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const CsvTable t = load_csv(cfg.input);
  std::size_t ceps;
  try {
    ceps = t.column("eps");
  } catch (const CsvError& e) {
    throw UsageError(cfg.input + ": " + e.what());
  }
  if (t.rows.empty()) throw UsageError(cfg.input + ": no data rows");
  std::vector<std::size_t> xcols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != ceps) xcols.push_back(c);
  }
  const std::size_t d = xcols.size();
  if (cfg.model == "poly" && d != 1) {
    throw UsageError("the polynomial model needs exactly one input column, got " +
                         std::to_string(d),
                     kUnsupported);
  }
  if (cfg.model == "nn" && d == 0) throw UsageError("the network model needs input columns");

  std::vector<ErrorSample> data(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t c : xcols) data[i].x.push_back(t.rows[i][c]);
    data[i].eps = t.rows[i][ceps];
  }
  const std::vector<double> eps = errors_of(data);

  VarianceModel model;
  double cost = 0.0;
  std::vector<double> sigma(data.size());
  try {
    if (cfg.model == "per-point") {
      FitOptions o;
      o.drop_constant = cfg.drop_constant;
      auto fit = fit_per_point(eps, o);
      for (std::size_t i = 0; i < data.size(); ++i) sigma[i] = predict_sigma(fit.model, i);
      cost = fit.cost;
      model = std::move(fit.model);
    } else if (cfg.model == "poly") {
      PolyFitOptions o;
      o.tol = cfg.tol;
      o.drop_constant = cfg.drop_constant;
      auto fit = fit_polynomial(data, o);
      for (std::size_t i = 0; i < data.size(); ++i) sigma[i] = predict_sigma(fit.model, data[i].x);
      cost = fit.cost;
      out << "order    " << fit.model.order() << '\n';
      model = std::move(fit.model);
    } else {
      MlpFitOptions o;
      o.drop_constant = cfg.drop_constant;
      auto fit = fit_mlp(data, o, cfg.seed);
      for (std::size_t i = 0; i < data.size(); ++i) sigma[i] = predict_sigma(fit.model, data[i].x);
      cost = fit.cost;
      model = std::move(fit.model);
    }
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }

  ensure_dir(cfg.out_dir);
  {
    auto f = open_out(fs::path(cfg.out_dir) / "model.json");
    f << model_to_json(model) << '\n';
  }
  {
    auto f = open_out(fs::path(cfg.out_dir) / "sigma.csv");
    for (std::size_t c : xcols) f << t.header[c] << ',';
    f << "eps,sigma\n";
    f.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (double v : data[i].x) f << v << ',';
      f << data[i].eps << ',' << sigma[i] << '\n';
    }
  }
  out << "model    " << family_name(model) << '\n';
  out << "n        " << data.size() << '\n';
  out << "cost     " << sig6(cost) << '\n';
  return kOk;
}

// --------------------------------------------------------------------------

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<DatasetName> datasets;
  for (const auto& d : cfg.datasets) datasets.push_back(parse_dataset(d));
  std::vector<Estimator> estimators;
  for (const auto& e : cfg.estimators) estimators.push_back(parse_estimator(e));
  std::sort(datasets.begin(), datasets.end());
  datasets.erase(std::unique(datasets.begin(), datasets.end()), datasets.end());
  std::sort(estimators.begin(), estimators.end());
  estimators.erase(std::unique(estimators.begin(), estimators.end()), estimators.end());

  ExperimentOptions opts;
  opts.n_runs = cfg.runs;
  opts.n_test = cfg.n_test;
  opts.master_seed = cfg.seed;
  opts.drop_constant = cfg.drop_constant;
  opts.poly.tol = cfg.tol;

  std::vector<ExperimentReport> reports;
  std::size_t supported = 0, succeeded = 0;
  for (DatasetName d : datasets) {
    const DatasetSpec spec = builtin_dataset(d);
    for (Estimator e : estimators) {
      if (!supports(d, e, spec.dim())) {
        err << "skipping " << to_string(e) << " on " << to_string(d) << " (unsupported)\n";
        continue;
      }
      ++supported;
      ExperimentReport rep = run_experiment(spec, e, opts);
      const auto vals = rep.nlpd_values();
      if (!vals.empty()) ++succeeded;
      out << to_string(d) << ' ' << to_string(e) << ": " << vals.size() << '/' << rep.runs.size()
          << " runs ok";
      if (!vals.empty()) {
        out << ", NLPD quartiles " << sig6(rep.nlpd_quartiles.q1) << ' '
            << sig6(rep.nlpd_quartiles.median) << ' ' << sig6(rep.nlpd_quartiles.q3);
      }
      out << '\n';
      for (const auto& r : rep.runs) {
        if (!r.ok) err << "  run " << r.run << " failed: " << r.error << '\n';
      }
      reports.push_back(std::move(rep));
    }
  }
  if (supported == 0) {
    throw UsageError("no supported dataset/estimator combination selected", kUnsupported);
  }

  ensure_dir(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  {
    auto f = open_out(dir / "config.json");
    f << to_json(cfg) << '\n';
  }
  {
    auto f = open_out(dir / "table1.csv");
    write_table_csv(f, reports);
  }
  {
    auto f = open_out(dir / "runs.csv");
    write_runs_csv(f, reports, cfg.timing);
  }
  for (const auto& rep : reports) {
    const std::string stem = "recovery_" + to_string(rep.dataset) + "_" + estimator_slug(rep.estimator);
    if (!rep.grid_x.empty() && !rep.nlpd_values().empty()) {
      auto f = open_out(dir / (stem + ".csv"));
      write_recovery_csv(f, rep);
      const auto s = sigma_recovery(rep);
      out << to_string(rep.dataset) << ' ' << to_string(rep.estimator) << ": sigma MAD "
          << sig6(s.mad) << ", 2-std coverage " << sig6(s.coverage) << '\n';
      if (cfg.plots) {
        auto g = open_out(dir / (stem + ".svg"));
        write_recovery_svg(g, rep);
      }
    }
    if (rep.dataset == DatasetName::FiveD && rep.estimator == Estimator::ArNn) {
      const MlpModel* net = nullptr;
      for (const auto& r : rep.runs) {
        if (r.ok && r.model) {
          net = std::get_if<MlpModel>(&*r.model);
          if (net) break;
        }
      }
      if (net) {
        const DensityMap map =
            density_plot_5d(*net, cfg.density_samples, derive_seed(cfg.seed, 0x5d));
        auto f = open_out(dir / "density_5d.csv");
        write_density_csv(f, map);
        out << "5D AR-NN: Pearson " << sig6(map.pearson) << ", diagonal peak fraction "
            << sig6(diagonal_peak_fraction(map, 0.15)) << '\n';
        if (cfg.plots) {
          auto g = open_out(dir / "density_5d.svg");
          write_density_svg(g, map);
        }
      }
    }
  }
  std::ostringstream table;
  write_table_csv(table, reports);
  out << table.str();
  return succeeded == 0 ? kNumericFailure : kOk;
}

// --------------------------------------------------------------------------

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.datasets.size() != 1) throw UsageError("gen takes exactly one dataset");
  const DatasetSpec spec = builtin_dataset(parse_dataset(cfg.datasets.front()), cfg.seed);
  const Dataset data =
      generate(spec, cfg.n_points == 0 ? spec.n_train : cfg.n_points, cfg.seed);
  if (cfg.output.empty()) {
    write_dataset_csv(out, data);
  } else {
    auto f = open_out(cfg.output);
    write_dataset_csv(f, data);
  }
  return kOk;
}

}  // namespace

// --------------------------------------------------------------------------

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Accuracy-reliability variance estimation", "arvar"};
  app.require_subcommand(1);
  std::vector<std::string> datasets, estimators;
  std::string tol_text;

  auto* score = app.add_subcommand("score", "Score Gaussian forecasts from a mu,sigma,y_obs CSV");
  score->add_option("input", cfg.input, "CSV file")->required();
  score->add_option("--csv", cfg.csv, "Also write the summary as CSV");
  score->add_option("--drop-constant", cfg.drop_constant, "Drop the RS constant in beta and AR");

  auto* fit = app.add_subcommand("fit", "Fit a variance model to an x1..xd,eps CSV");
  fit->add_option("input", cfg.input, "CSV file")->required();
  fit->add_option("--model", cfg.model, "per-point, poly or nn");
  fit->add_option("--tol", tol_text, "Polynomial escalation tolerance (inf allowed)");
  fit->add_option("--seed", cfg.seed, "Master seed");
  fit->add_option("--out-dir", cfg.out_dir, "Output directory");
  fit->add_option("--drop-constant", cfg.drop_constant, "Drop the RS constant");

  auto* bench = app.add_subcommand("bench", "Run the multi-run NLPD benchmark");
  bench->add_option("--datasets", datasets, "Comma-separated: G,Y,W,5D");
  bench->add_option("--estimators", estimators, "Comma-separated: gp,ar-nn,ar-poly");
  bench->add_option("--runs", cfg.runs, "Runs per cell");
  bench->add_option("--n-test", cfg.n_test, "Test points per run");
  bench->add_option("--density-samples", cfg.density_samples, "Samples for the 5D density map");
  bench->add_option("--seed", cfg.seed, "Master seed");
  bench->add_option("--out-dir", cfg.out_dir, "Output directory");
  bench->add_option("--tol", tol_text, "Polynomial escalation tolerance");
  bench->add_option("--drop-constant", cfg.drop_constant, "Drop the RS constant");
  bench->add_flag("--plots", cfg.plots, "Write SVG plots");
  bench->add_flag("--timing", cfg.timing, "Add wall time to runs.csv");

  auto* gen = app.add_subcommand("gen", "Dump a synthetic dataset as CSV");
  gen->add_option("--dataset,--datasets", datasets, "G, Y, W or 5D")->required();
  gen->add_option("--n", cfg.n_points, "Number of points (default: training size)");
  gen->add_option("--seed", cfg.seed, "Seed");
  gen->add_option("-o,--output", cfg.output, "Output file (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    for (auto* sub : {score, fit, bench, gen}) {
      if (sub->parsed()) throw HelpRequested(sub->help());
    }
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (auto* sub : {score, fit, bench, gen}) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  if (!datasets.empty()) cfg.datasets = split_list(datasets);
  if (!estimators.empty()) cfg.estimators = split_list(estimators);
  if (cfg.command == "gen" && cfg.datasets.size() != 1) {
    throw UsageError("gen takes exactly one dataset");
  }
  if (!tol_text.empty()) {
    const std::string t = lower(tol_text);
    if (t == "inf" || t == "infinity") {
      cfg.tol = std::numeric_limits<double>::infinity();
    } else {
      try {
        std::size_t used = 0;
        cfg.tol = std::stod(tol_text, &used);
        if (used != tol_text.size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw UsageError("--tol: not a number: " + tol_text);
      }
    }
  }
  canonicalize(cfg);
  return cfg;
}

std::string to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["input"] = cfg.input;
  j["csv"] = cfg.csv;
  j["output"] = cfg.output;
  j["seed"] = cfg.seed;
  j["runs"] = cfg.runs;
  j["n_test"] = cfg.n_test;
  j["n_points"] = cfg.n_points;
  j["density_samples"] = cfg.density_samples;
  j["out_dir"] = cfg.out_dir;
  j["model"] = cfg.model;
  j["datasets"] = cfg.datasets;
  j["estimators"] = cfg.estimators;
  if (std::isinf(cfg.tol)) {
    j["tol"] = "inf";
  } else {
    j["tol"] = cfg.tol;
  }
  j["drop_constant"] = cfg.drop_constant;
  j["plots"] = cfg.plots;
  j["timing"] = cfg.timing;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    cfg.command = j.at("command").get<std::string>();
    cfg.input = j.at("input").get<std::string>();
    cfg.csv = j.at("csv").get<std::string>();
    cfg.output = j.at("output").get<std::string>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.runs = j.at("runs").get<std::size_t>();
    cfg.n_test = j.at("n_test").get<std::size_t>();
    cfg.n_points = j.at("n_points").get<std::size_t>();
    cfg.density_samples = j.at("density_samples").get<std::size_t>();
    cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.model = j.at("model").get<std::string>();
    cfg.datasets = j.at("datasets").get<std::vector<std::string>>();
    cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    const json& tol = j.at("tol");
    if (tol.is_string()) {
      if (tol.get<std::string>() != "inf") throw UsageError("config: bad tol");
      cfg.tol = std::numeric_limits<double>::infinity();
    } else {
      cfg.tol = tol.get<double>();
    }
    cfg.drop_constant = j.at("drop_constant").get<bool>();
    cfg.plots = j.at("plots").get<bool>();
    cfg.timing = j.at("timing").get<bool>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  canonicalize(cfg);
  return cfg;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.command == "score") return cmd_score(cfg, out);
  if (cfg.command == "fit") return cmd_fit(cfg, out);
  if (cfg.command == "bench") return cmd_bench(cfg, out, err);
  if (cfg.command == "gen") return cmd_gen(cfg, out);
  throw UsageError("unknown command '" + cfg.command + "'");
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_args(args);
    return run_command(cfg, out, err);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const OptimError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const RestartError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace arvar::cli
