#include "nsc/model_io.hpp"

#include <stdexcept>

#include "json.hpp"

namespace nsc {

namespace {

using nlohmann::json;

json mask_list(std::uint32_t mask) {
  json out = json::array();
  for (int j = 0; j < 32; ++j) {
    if ((mask >> j) & 1u) out.push_back(j + 1);
  }
  return out;
}

std::uint32_t list_mask(const json& j, const char* key) {
  std::uint32_t mask = 0;
  if (!j.contains(key)) return mask;
  for (const auto& v : j.at(key)) {
    const int c = v.get<int>();
    if (c < 1 || c > 32) throw std::invalid_argument(std::string("model: bad coordinate in '") + key + "'");
    mask |= 1u << (c - 1);
  }
  return mask;
}

json term_json(const BasisTerm& t) {
  json out = json::object();
  if (t.l_mask) out["l"] = mask_list(t.l_mask);
  if (t.l_complement_mask) out["l_complement"] = mask_list(t.l_complement_mask);
  if (t.x_mask) out["x"] = mask_list(t.x_mask);
  if (t.x_complement_mask) out["x_complement"] = mask_list(t.x_complement_mask);
  if (t.is_transform()) {
    out["transform"] = t.transform;
    out["transform_l"] = mask_list(t.transform_l_support);
  }
  return out;
}

BasisTerm parse_term(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("model: basis term must be an object");
  BasisTerm t;
  if (j.contains("transform")) {
    t = BasisTerm::user(j.at("transform").get<std::string>(), list_mask(j, "transform_l"));
    return t;
  }
  t.l_mask = list_mask(j, "l");
  t.l_complement_mask = list_mask(j, "l_complement");
  t.x_mask = list_mask(j, "x");
  t.x_complement_mask = list_mask(j, "x_complement");
  return t;
}

json predictor_json(const BasisSpec& basis, const Eigen::VectorXd& coef) {
  json out = json::object();
  json terms = json::array();
  for (const auto& t : basis.terms()) terms.push_back(term_json(t));
  out["terms"] = std::move(terms);
  if (!basis.l0().empty()) out["l0"] = basis.l0();
  out["coef"] = std::vector<double>(coef.data(), coef.data() + coef.size());
  return out;
}

LinearPredictor parse_predictor(const json& j, const TransformRegistry* registry) {
  std::vector<BasisTerm> terms;
  for (const auto& t : j.at("terms")) terms.push_back(parse_term(t));
  std::vector<double> l0;
  if (j.contains("l0")) l0 = j.at("l0").get<std::vector<double>>();
  const auto coef = j.at("coef").get<std::vector<double>>();
  if (coef.size() != terms.size()) throw std::invalid_argument("model: coefficient count does not match terms");
  BasisSpec basis(std::move(terms), std::move(l0), registry);
  return LinearPredictor(std::move(basis), Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size())));
}

json parse_text(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("kind", "") != kind) {
    throw std::invalid_argument(std::string("model: expected kind '") + kind + "'");
  }
  return j;
}

}  // namespace

std::string serialize(const SelectionModel& model) {
  json out;
  out["kind"] = "selection_model";
  out["k"] = model.k();
  out["reference"] = model.odds().reference();
  json delta = json::array();
  json baseline = json::array();
  for (int i = 0; i < model.k(); ++i) {
    delta.push_back(predictor_json(model.odds().delta_h(i).basis, model.odds().delta_h(i).coef));
    baseline.push_back(predictor_json(model.baseline(i).basis, model.baseline(i).coef));
  }
  out["delta_h"] = std::move(delta);
  out["baseline"] = std::move(baseline);
  if (model.theta()) {
    json pair = json::array();
    for (const auto& p : model.theta()->pair) pair.push_back(predictor_json(p.basis, p.coef));
    out["theta"] = {{"pair", std::move(pair)},
                    {"triple", predictor_json(model.theta()->triple.basis, model.theta()->triple.coef)}};
  }
  return out.dump(2);
}

std::string serialize(const PatternMixtureModel& model, int k) {
  json out;
  out["kind"] = "pattern_mixture";
  out["k"] = k;
  json comps = json::array();
  for (const auto& c : model.components()) {
    json entry = predictor_json(c.basis, c.coef);
    entry["pattern"] = c.pattern.to_string();
    entry["mode"] = c.mode == MixtureMode::ratio ? "ratio" : "weighted_regression";
    if (c.mode == MixtureMode::ratio) {
      entry["denominator_coef"] =
          std::vector<double>(c.denominator_coef.data(), c.denominator_coef.data() + c.denominator_coef.size());
    }
    comps.push_back(std::move(entry));
  }
  out["components"] = std::move(comps);
  return out.dump(2);
}

SelectionModel parse_selection_model(const std::string& text, const TransformRegistry* registry) {
  const json j = parse_text(text, "selection_model");
  try {
    const int k = j.at("k").get<int>();
    std::vector<LinearPredictor> delta;
    std::vector<LinearPredictor> baseline;
    for (const auto& d : j.at("delta_h")) delta.push_back(parse_predictor(d, registry));
    for (const auto& b : j.at("baseline")) baseline.push_back(parse_predictor(b, registry));
    std::optional<ThetaTerms> theta;
    if (j.contains("theta")) {
      ThetaTerms t;
      const auto& pair = j.at("theta").at("pair");
      if (pair.size() != 3) throw std::invalid_argument("model: theta needs three pair terms");
      for (int a = 0; a < 3; ++a) t.pair[a] = parse_predictor(pair[a], registry);
      t.triple = parse_predictor(j.at("theta").at("triple"), registry);
      theta = std::move(t);
    }
    OddsRatioSpec odds(k, std::move(delta), j.at("reference").get<std::vector<double>>());
    return SelectionModel(std::move(odds), std::move(baseline), std::move(theta));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
}

PatternMixtureModel parse_pattern_mixture(const std::string& text, const TransformRegistry* registry) {
  const json j = parse_text(text, "pattern_mixture");
  try {
    const int k = j.at("k").get<int>();
    PatternMixtureModel model;
    for (const auto& entry : j.at("components")) {
      MixtureComponent c;
      c.pattern = Pattern::parse(entry.at("pattern").get<std::string>());
      if (c.pattern.k() != k) throw std::invalid_argument("model: pattern length does not match k");
      auto pred = parse_predictor(entry, registry);
      c.basis = std::move(pred.basis);
      c.coef = std::move(pred.coef);
      const std::string mode = entry.value("mode", "weighted_regression");
      if (mode == "ratio") {
        c.mode = MixtureMode::ratio;
        const auto den = entry.at("denominator_coef").get<std::vector<double>>();
        c.denominator_coef = Eigen::Map<const Eigen::VectorXd>(den.data(), static_cast<Eigen::Index>(den.size()));
      } else if (mode != "weighted_regression") {
        throw std::invalid_argument("model: unknown mixture mode '" + mode + "'");
      }
      model.set(std::move(c));
    }
    return model;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
}

}  // namespace nsc
