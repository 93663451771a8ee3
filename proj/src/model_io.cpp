#include "modev/model_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "modev/errors.hpp"

namespace modev {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + key + "' in " + where);
  return obj.at(key);
}

Vec to_vec(const json& j, const std::string& what) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError(what + " must be a number or an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Mat to_mat(const json& j, const std::string& what) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(what + " must be an array of rows");
  }
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw ConfigError(what + " has ragged rows");
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

DriftPtr drift_from_json(const json& j, int d) {
  const std::string where = "drift";
  const std::string name = require(j, "name", where).get<std::string>();
  if (name == "zero") {
    reject_unknown(j, {"name"}, where);
    return make_zero_drift(d);
  }
  if (name == "constant") {
    reject_unknown(j, {"name", "value"}, where);
    return make_constant_drift(to_vec(require(j, "value", where), "drift.value"));
  }
  if (name == "linear") {
    reject_unknown(j, {"name", "matrix", "offset"}, where);
    Mat m = to_mat(require(j, "matrix", where), "drift.matrix");
    Vec c = j.contains("offset") ? to_vec(j.at("offset"), "drift.offset") : Vec::Zero(m.rows());
    return std::make_shared<LinearDrift>(std::move(m), std::move(c));
  }
  if (name == "ou") {
    reject_unknown(j, {"name", "theta"}, where);
    return make_ou_drift(d, j.value("theta", 1.0));
  }
  if (name == "tanh") {
    reject_unknown(j, {"name", "scale"}, where);
    return std::make_shared<TanhDrift>(d, j.value("scale", 1.0));
  }
  if (name == "square") {
    reject_unknown(j, {"name"}, where);
    return std::make_shared<SquareDrift>(d);
  }
  throw ConfigError("unknown drift '" + name + "'");
}

ProductFactor factor_from_json(const json& j) {
  const std::string where = "kernel.factors[]";
  const std::string name = require(j, "name", where).get<std::string>();
  if (name == "gaussian") {
    reject_unknown(j, {"name", "variance"}, where);
    return ProductFactor::gaussian(j.value("variance", 1.0));
  }
  reject_unknown(j, {"name"}, where);
  if (name == "rademacher") return ProductFactor::rademacher();
  if (name == "point_mass") return ProductFactor::point_mass();
  throw ConfigError("unknown product factor '" + name + "'");
}

KernelPtr kernel_from_json(const json& j, int d) {
  const std::string where = "kernel";
  const std::string name = require(j, "name", where).get<std::string>();
  if (name == "gaussian") {
    reject_unknown(j, {"name", "variance", "covariance"}, where);
    if (j.contains("covariance")) {
      return std::make_shared<GaussianKernel>(to_mat(j.at("covariance"), "kernel.covariance"));
    }
    return std::make_shared<GaussianKernel>(j.value("variance", 1.0) * Mat::Identity(d, d));
  }
  if (name == "rademacher") {
    reject_unknown(j, {"name"}, where);
    return std::make_shared<RademacherKernel>(d);
  }
  if (name == "discrete") {
    reject_unknown(j, {"name", "atoms", "probs"}, where);
    // Atoms are listed one per row; stored as columns.
    const Mat rows = to_mat(require(j, "atoms", where), "kernel.atoms");
    return std::make_shared<DiscreteKernel>(rows.transpose(),
                                            to_vec(require(j, "probs", where), "kernel.probs"));
  }
  if (name == "product") {
    reject_unknown(j, {"name", "factors"}, where);
    std::vector<ProductFactor> factors;
    for (const auto& f : require(j, "factors", where)) factors.push_back(factor_from_json(f));
    return std::make_shared<ProductKernel>(std::move(factors));
  }
  if (name == "point_mass") {
    reject_unknown(j, {"name"}, where);
    return std::make_shared<ProductKernel>(std::vector<ProductFactor>(d, ProductFactor::point_mass()));
  }
  if (name == "exponential") {
    reject_unknown(j, {"name"}, where);
    return make_centered_exponential_kernel(d);
  }
  throw ConfigError("unknown kernel '" + name + "'");
}

}  // namespace

ModelSpec model_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("model document must be a JSON object");
  reject_unknown(doc, {"id", "dimension", "x0", "drift", "kernel", "gamma", "bounds"}, "model");
  try {
    const int d = require(doc, "dimension", "model").get<int>();
    if (d < 1) throw ConfigError("model.dimension must be positive");
    Vec x0 = doc.contains("x0") ? to_vec(doc.at("x0"), "model.x0") : Vec::Zero(d);
    DeclaredBounds bounds;
    if (doc.contains("bounds")) {
      const auto& b = doc.at("bounds");
      reject_unknown(b, {"K_b", "K_A", "K_mgf", "lambda", "probe_radius"}, "bounds");
      bounds.drift = b.value("K_b", bounds.drift);
      bounds.covariance = b.value("K_A", bounds.covariance);
      bounds.mgf = b.value("K_mgf", bounds.mgf);
      bounds.lambda = b.value("lambda", bounds.lambda);
      bounds.probe_radius = b.value("probe_radius", bounds.probe_radius);
    }
    return make_model(doc.value("id", std::string("custom")), std::move(x0),
                      drift_from_json(require(doc, "drift", "model"), d),
                      kernel_from_json(require(doc, "kernel", "model"), d),
                      doc.value("gamma", 0.25), bounds);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid model document: ") + e.what());
  }
}

std::vector<std::string> catalog_model_ids() {
  return {"gauss1", "ou1", "rad1", "degen2", "zero1", "exp1", "tanh1", "osc2"};
}

ModelSpec catalog_model(const std::string& id) {
  if (id == "gauss1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"drift", {{"name", "zero"}}},
                            {"kernel", {{"name", "gaussian"}}}});
  }
  if (id == "ou1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"drift", {{"name", "ou"}, {"theta", 1.0}}},
                            {"kernel", {{"name", "gaussian"}}}});
  }
  if (id == "rad1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"drift", {{"name", "zero"}}},
                            {"kernel", {{"name", "rademacher"}}}});
  }
  if (id == "degen2") {
    return model_from_json(
        {{"id", id}, {"dimension", 2}, {"drift", {{"name", "zero"}}},
         {"kernel",
          {{"name", "product"},
           {"factors", json::array({{{"name", "rademacher"}}, {{"name", "point_mass"}}})}}}});
  }
  if (id == "zero1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"drift", {{"name", "zero"}}},
                            {"kernel", {{"name", "point_mass"}}}});
  }
  if (id == "exp1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"drift", {{"name", "zero"}}},
                            {"kernel", {{"name", "exponential"}}}});
  }
  if (id == "tanh1") {
    return model_from_json({{"id", id}, {"dimension", 1}, {"x0", 0.5},
                            {"drift", {{"name", "tanh"}, {"scale", 1.0}}},
                            {"kernel", {{"name", "gaussian"}}}});
  }
  if (id == "osc2") {
    // Damped oscillator driven through the first coordinate only.
    return model_from_json({{"id", id},
                            {"dimension", 2},
                            {"drift", {{"name", "linear"}, {"matrix", {{-0.5, -1.0}, {1.0, 0.0}}}}},
                            {"kernel", {{"name", "gaussian"}, {"covariance", {{1.0, 0.0}, {0.0, 0.0}}}}}});
  }
  throw ConfigError("unknown model '" + id + "'");
}

ModelSpec load_model(const std::string& id_or_path) {
  const auto ids = catalog_model_ids();
  if (std::find(ids.begin(), ids.end(), id_or_path) != ids.end()) return catalog_model(id_or_path);
  if (!std::filesystem::exists(id_or_path)) {
    throw ConfigError("model '" + id_or_path + "' is neither a catalog id nor a readable file");
  }
  std::ifstream in(id_or_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed model JSON in " + id_or_path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace modev
