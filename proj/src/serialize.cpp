#include "arvar/serialize.hpp"

#include <json.hpp>

namespace arvar {

using nlohmann::json;

namespace {

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json envelope(const std::string& family) {
  return json{{"format", "arvar-model"}, {"version", kModelFormatVersion}, {"family", family}};
}

json parse_envelope(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "arvar-model") {
    throw FormatError("model JSON: missing or wrong 'format' tag");
  }
  if (j.value("version", 0) != kModelFormatVersion) {
    throw FormatError("model JSON: unsupported version");
  }
  return j;
}

}  // namespace

std::string family_name(const VarianceModel& model) {
  switch (model.index()) {
    case 0: return "per-point";
    case 1: return "poly";
    default: return "mlp";
  }
}

std::string model_to_json(const VarianceModel& model) {
  json j = envelope(family_name(model));
  if (const auto* pp = std::get_if<PerPointModel>(&model)) {
    j["log_sigmas"] = std::vector<double>(pp->log_sigmas().begin(), pp->log_sigmas().end());
  } else if (const auto* poly = std::get_if<PolynomialModel>(&model)) {
    j["input_dim"] = 1;
    j["x_scale"] = poly->x_scale();
    j["thetas"] = std::vector<double>(poly->thetas().begin(), poly->thetas().end());
  } else {
    const auto& mlp = std::get<MlpModel>(model);
    j["input_dim"] = mlp.input_dim();
    j["layers"] = json::array({
        {{"size", MlpModel::kHidden1}, {"activation", "tanh"}},
        {{"size", MlpModel::kHidden2}, {"activation", "satlins"}},
        {{"size", 1}, {"activation", "sqexp"}},
    });
    j["input_offset"] = vec(mlp.input_offset());
    j["input_scale"] = vec(mlp.input_scale());
    j["output_scale"] = mlp.output_scale();
    j["parameters"] = vec(mlp.parameters());
  }
  return j.dump(2);
}

VarianceModel model_from_json(const std::string& text) {
  const json j = parse_envelope(text);
  try {
    const std::string family = j.at("family").get<std::string>();
    if (family == "per-point") {
      return PerPointModel(j.at("log_sigmas").get<std::vector<double>>());
    }
    if (family == "poly") {
      return PolynomialModel(j.at("thetas").get<std::vector<double>>(), j.at("x_scale").get<double>());
    }
    if (family == "mlp") {
      MlpModel m(j.at("input_dim").get<std::size_t>());
      m.set_input_map(to_vector(j.at("input_offset")), to_vector(j.at("input_scale")));
      m.set_output_scale(j.at("output_scale").get<double>());
      m.set_parameters(to_vector(j.at("parameters")));
      return m;
    }
    throw FormatError("model JSON: unknown family '" + family + "'");
  } catch (const json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  } catch (const std::domain_error& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

std::string gp_to_json(const GpModel& model) {
  json j = envelope("gp");
  const auto& h = model.hyperparameters();
  j["sigma_f"] = h.sigma_f;
  j["ell"] = h.ell;
  j["noise_var"] = h.noise_var;
  j["input_dim"] = model.input_dim();
  json rows = json::array();
  for (Eigen::Index i = 0; i < model.inputs().rows(); ++i) {
    rows.push_back(vec(model.inputs().row(i).transpose()));
  }
  j["inputs"] = rows;
  j["targets"] = vec(model.targets());
  return j.dump(2);
}

GpModel gp_from_json(const std::string& text) {
  const json j = parse_envelope(text);
  try {
    if (j.at("family").get<std::string>() != "gp") throw FormatError("model JSON: not a GP model");
    const auto rows = j.at("inputs").get<std::vector<std::vector<double>>>();
    const auto d = j.at("input_dim").get<std::size_t>();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) throw FormatError("model JSON: GP input row has wrong dimension");
      for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    GpHyperparameters h{j.at("sigma_f").get<double>(), j.at("ell").get<double>(),
                        j.at("noise_var").get<double>()};
    return GpModel(std::move(x), to_vector(j.at("targets")), h);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace arvar
