#include "xmb/learn/spec.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "xmb/error.hpp"

namespace xmb::learn {

std::string_view kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::LogReg: return "logreg";
    case ClassifierKind::LinearSVM: return "linear_svm";
    case ClassifierKind::KNN: return "knn";
    case ClassifierKind::DecisionTree: return "decision_tree";
    case ClassifierKind::RandomForest: return "random_forest";
    case ClassifierKind::GBDT: return "gbdt";
    case ClassifierKind::BaggedSVM: return "bagged_svm";
    case ClassifierKind::Voting: return "voting";
  }
  return "logreg";
}

ClassifierKind parse_kind(std::string_view s) {
  for (auto k : {ClassifierKind::LogReg, ClassifierKind::LinearSVM, ClassifierKind::KNN, ClassifierKind::DecisionTree,
                 ClassifierKind::RandomForest, ClassifierKind::GBDT, ClassifierKind::BaggedSVM, ClassifierKind::Voting})
    if (kind_name(k) == s) return k;
  throw ConfigError("unknown classifier kind '" + std::string(s) + "'");
}

std::string_view preset_name(GbdtPreset p) {
  switch (p) {
    case GbdtPreset::GB: return "gb";
    case GbdtPreset::XGB: return "xgb";
    case GbdtPreset::LGBM: return "lgbm";
    case GbdtPreset::CatBoostApprox: return "catboost-approx";
  }
  return "gb";
}

GbdtPreset parse_preset(std::string_view s) {
  for (auto p : {GbdtPreset::GB, GbdtPreset::XGB, GbdtPreset::LGBM, GbdtPreset::CatBoostApprox})
    if (preset_name(p) == s) return p;
  throw ConfigError("unknown GBDT preset '" + std::string(s) + "'");
}

std::vector<ParamDef> param_schema(ClassifierKind kind, std::optional<GbdtPreset> preset) {
  using T = ParamType;
  switch (kind) {
    case ClassifierKind::LogReg:
      return {{"lambda", T::Real, "1e-4", 0.0, {}},
              {"max_epochs", T::Integer, "500", 1, {}},
              {"tolerance", T::Real, "1e-5", 0.0, {}},
              {"memory", T::Integer, "10", 1, {}},
              {"standardize", T::Boolean, "true", 0, {}}};
    case ClassifierKind::LinearSVM:
      return {{"lambda", T::Real, "1e-3", 1e-12, {}},
              {"epochs", T::Integer, "30", 1, {}},
              {"standardize", T::Boolean, "true", 0, {}}};
    case ClassifierKind::KNN:
      return {{"k", T::Integer, "5", 1, {}}};
    case ClassifierKind::DecisionTree:
      return {{"max_depth", T::Integer, "12", 1, {}}, {"min_samples_leaf", T::Integer, "2", 1, {}}};
    case ClassifierKind::RandomForest:
      return {{"n_trees", T::Integer, "200", 1, {}},
              {"max_depth", T::Integer, "12", 1, {}},
              {"min_samples_leaf", T::Integer, "2", 1, {}},
              {"max_features", T::Integer, "0", 0, {}},  // 0 = floor(sqrt(k))
              {"bootstrap", T::Boolean, "true", 0, {}}};
    case ClassifierKind::GBDT: {
      const auto p = preset.value_or(GbdtPreset::GB);
      std::vector<ParamDef> defs = {{"rounds", T::Integer, "300", 1, {}},
                                    {"learning_rate", T::Real, "0.1", 1e-12, {}},
                                    {"max_depth", T::Integer, "6", 1, {}}};
      if (p == GbdtPreset::GB || p == GbdtPreset::CatBoostApprox) defs.push_back({"min_samples_leaf", T::Integer, "1", 1, {}});
      if (p == GbdtPreset::XGB) {
        defs.push_back({"lambda", T::Real, "1.0", 0.0, {}});
        defs.push_back({"min_child_weight", T::Real, "1.0", 0.0, {}});
        defs.push_back({"min_samples_leaf", T::Integer, "1", 1, {}});
      }
      if (p == GbdtPreset::LGBM) {
        defs.push_back({"lambda", T::Real, "1.0", 0.0, {}});
        defs.push_back({"min_child_weight", T::Real, "1e-3", 0.0, {}});
        defs.push_back({"min_samples_leaf", T::Integer, "20", 1, {}});
        defs.push_back({"max_leaves", T::Integer, "31", 2, {}});
        defs.push_back({"bins", T::Integer, "256", 2, {}});
      }
      return defs;
    }
    case ClassifierKind::BaggedSVM:
      return {{"n_estimators", T::Integer, "25", 1, {}},
              {"lambda", T::Real, "1e-3", 1e-12, {}},
              {"epochs", T::Integer, "30", 1, {}},
              {"standardize", T::Boolean, "true", 0, {}}};
    case ClassifierKind::Voting:
      return {{"mode", T::Choice, "soft", 0, {"soft", "hard"}}};
  }
  return {};
}

namespace {

void check_value(const ParamDef& def, const std::string& value, const std::string& where) {
  const std::string what = where + "." + def.key;
  switch (def.type) {
    case ParamType::Real: {
      double v = parse_double(value, what);
      if (!(v >= def.min)) throw ConfigError(what + " must be >= " + std::to_string(def.min));
      break;
    }
    case ParamType::Integer: {
      auto v = parse_int(value, what);
      if (static_cast<double>(v) < def.min) throw ConfigError(what + " must be >= " + std::to_string(static_cast<long long>(def.min)));
      break;
    }
    case ParamType::Boolean: parse_bool(value, what); break;
    case ParamType::Choice:
      if (std::find(def.choices.begin(), def.choices.end(), value) == def.choices.end())
        throw ConfigError(what + ": invalid choice '" + value + "'");
      break;
  }
}

}  // namespace

void ClassifierSpec::validate() const {
  const std::string where = name.empty() ? std::string(kind_name(kind)) : name;
  if (preset && kind != ClassifierKind::GBDT) throw ConfigError(where + ": preset is only valid for gbdt");
  auto schema = param_schema(kind, preset);
  for (const auto& [k, v] : hyperparameters) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ParamDef& d) { return d.key == k; });
    if (it == schema.end()) throw ConfigError(where + ": unknown hyperparameter '" + k + "' for " + std::string(kind_name(kind)));
    check_value(*it, v, where);
  }
  if (kind == ClassifierKind::Voting) {
    if (members.empty()) throw ConfigError(where + ": voting needs at least one member");
    for (const auto& m : members) {
      if (m.kind == ClassifierKind::Voting) throw ConfigError(where + ": nested voting is not supported");
      m.validate();
    }
  } else if (!members.empty()) {
    throw ConfigError(where + ": members are only valid for voting");
  }
}

nlohmann::json ClassifierSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["kind"] = kind_name(kind);
  j["preset"] = preset ? nlohmann::json(preset_name(*preset)) : nlohmann::json(nullptr);
  j["hyperparameters"] = hyperparameters;
  j["seed"] = seed;
  j["members"] = nlohmann::json::array();
  for (const auto& m : members) j["members"].push_back(m.to_json());
  return j;
}

ClassifierSpec ClassifierSpec::from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  s.name = j.value("name", "");
  s.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("preset") && !j["preset"].is_null()) s.preset = parse_preset(j["preset"].get<std::string>());
  s.hyperparameters = j.value("hyperparameters", std::map<std::string, std::string>{});
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("members"))
    for (const auto& m : j["members"]) s.members.push_back(from_json(m));
  return s;
}

Hyper::Hyper(const ClassifierSpec& spec) {
  spec.validate();
  for (const auto& d : param_schema(spec.kind, spec.preset)) values_[d.key] = d.default_value;
  for (const auto& [k, v] : spec.hyperparameters) values_[k] = v;
}

double Hyper::real(const std::string& key) const { return parse_double(values_.at(key), key); }
std::int64_t Hyper::integer(const std::string& key) const { return parse_int(values_.at(key), key); }
bool Hyper::boolean(const std::string& key) const { return parse_bool(values_.at(key), key); }
std::string Hyper::choice(const std::string& key) const { return values_.at(key); }

namespace {

ClassifierSpec make(std::string name, ClassifierKind kind, std::optional<GbdtPreset> preset = std::nullopt) {
  ClassifierSpec s;
  s.name = std::move(name);
  s.kind = kind;
  s.preset = preset;
  return s;
}

}  // namespace

ClassifierSpec default_voting_spec() {
  auto v = make("Voting_Classifier", ClassifierKind::Voting);
  v.members = {make("LR", ClassifierKind::LogReg), make("RF", ClassifierKind::RandomForest),
               make("XGB", ClassifierKind::GBDT, GbdtPreset::XGB)};
  return v;
}

std::vector<ClassifierSpec> default_classifier_specs() {
  return {make("LR", ClassifierKind::LogReg),
          make("SVM", ClassifierKind::LinearSVM),
          make("DT", ClassifierKind::DecisionTree),
          make("RF", ClassifierKind::RandomForest),
          make("KNN", ClassifierKind::KNN),
          make("XGB", ClassifierKind::GBDT, GbdtPreset::XGB),
          make("LGBM", ClassifierKind::GBDT, GbdtPreset::LGBM),
          make("CatBoost", ClassifierKind::GBDT, GbdtPreset::CatBoostApprox),
          make("Bagged_SVM", ClassifierKind::BaggedSVM),
          default_voting_spec(),
          make("GB", ClassifierKind::GBDT, GbdtPreset::GB)};
}

std::vector<ClassifierSpec> specs_from_config(const KeyValueConfig& cfg, const std::vector<std::string>& order) {
  // Collect block names in file order.
  std::vector<std::string> blocks;
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& [key, value] : cfg.section("clf.")) {
    auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0) throw ConfigError("malformed classifier key 'clf." + key + "'");
    auto name = key.substr(0, dot);
    if (!raw.count(name)) blocks.push_back(name);
    raw[name][key.substr(dot + 1)] = value;
  }

  std::function<ClassifierSpec(const std::string&, int)> build = [&](const std::string& name, int depth) {
    auto it = raw.find(name);
    if (it == raw.end()) {
      for (auto& d : default_classifier_specs())
        if (d.name == name) {
          if (depth > 0 && d.kind == ClassifierKind::Voting) throw ConfigError("nested voting is not supported");
          return d;
        }
      throw ConfigError("classifier '" + name + "' is neither a default nor defined by clf." + name + ".kind");
    }
    auto fields = it->second;
    if (!fields.count("kind")) throw ConfigError("clf." + name + ".kind is required");
    ClassifierSpec s;
    s.name = name;
    s.kind = parse_kind(fields["kind"]);
    fields.erase("kind");
    if (fields.count("preset")) {
      s.preset = parse_preset(fields["preset"]);
      fields.erase("preset");
    }
    if (s.kind == ClassifierKind::GBDT && !s.preset) s.preset = GbdtPreset::GB;
    if (fields.count("members")) {
      if (s.kind != ClassifierKind::Voting) throw ConfigError("clf." + name + ".members is only valid for voting");
      if (depth > 0) throw ConfigError("nested voting is not supported");
      for (const auto& m : split_list(fields["members"])) s.members.push_back(build(m, depth + 1));
      fields.erase("members");
    } else if (s.kind == ClassifierKind::Voting) {
      s.members = default_voting_spec().members;
    }
    s.hyperparameters = fields;
    s.validate();
    return s;
  };

  std::vector<ClassifierSpec> out;
  for (const auto& name : order.empty() ? blocks : order) out.push_back(build(name, 0));
  return out;
}

}  // namespace xmb::learn
