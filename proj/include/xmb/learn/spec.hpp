#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmb/config.hpp"

namespace xmb::learn {

enum class ClassifierKind { LogReg, LinearSVM, KNN, DecisionTree, RandomForest, GBDT, BaggedSVM, Voting };
enum class GbdtPreset { GB, XGB, LGBM, CatBoostApprox };

std::string_view kind_name(ClassifierKind k);  // logreg, linear_svm, knn, ...
ClassifierKind parse_kind(std::string_view s);
std::string_view preset_name(GbdtPreset p);    // gb, xgb, lgbm, catboost-approx
GbdtPreset parse_preset(std::string_view s);

struct ClassifierSpec {
  std::string name;  // display name, e.g. "XGB"
  ClassifierKind kind = ClassifierKind::LogReg;
  std::optional<GbdtPreset> preset;
  std::map<std::string, std::string> hyperparameters;
  std::uint64_t seed = 0;
  std::vector<ClassifierSpec> members;  // Voting only

  // Checks the preset/kind pairing and every hyperparameter against the
  // kind's schema. Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static ClassifierSpec from_json(const nlohmann::json& j);
};

enum class ParamType { Real, Integer, Boolean, Choice };

struct ParamDef {
  std::string key;
  ParamType type;
  std::string default_value;
  double min = 0.0;  // inclusive lower bound for numeric types
  std::vector<std::string> choices;
};

std::vector<ParamDef> param_schema(ClassifierKind kind, std::optional<GbdtPreset> preset);

/// Typed, validated view of a spec's hyperparameters with schema defaults.
class Hyper {
 public:
  explicit Hyper(const ClassifierSpec& spec);
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::string choice(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

// The classifier grid: LR, SVM, DT, RF, KNN, XGB, LGBM, CatBoost, Bagged_SVM,
// Voting_Classifier, GB.
std::vector<ClassifierSpec> default_classifier_specs();
ClassifierSpec default_voting_spec();

/// Reads `clf.<name>.*` blocks. Recognised keys per block: kind, preset,
/// members (Voting: comma-separated names of other blocks), and the kind's
/// hyperparameters. A name with no block falls back to the default spec of
/// that name. If `order` is empty every defined block is returned in file
/// order.
std::vector<ClassifierSpec> specs_from_config(const KeyValueConfig& cfg, const std::vector<std::string>& order);

}  // namespace xmb::learn
