// config_json.hpp - JSON (de)serialization of the config structs, keyed by
// their field names; missing keys keep defaults
#pragma once

#include <json.hpp>
#include <string>

#include "tfish/adaptation.hpp"
#include "tfish/dataset.hpp"
#include "tfish/features.hpp"
#include "tfish/model.hpp"

namespace tfish {

DatasetSpec dataset_spec_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);
FeatureConfig feature_config_from_json(const nlohmann::json& j);
AdaptationSpec adaptation_spec_from_json(const nlohmann::json& j);

// A config file may carry any of the sections "dataset", "model", "features",
// "adaptation"; absent sections fall back to defaults.
struct ConfigFile {
  DatasetSpec dataset;
  ModelConfig model;
  FeatureConfig features;
  AdaptationSpec adaptation;
};

ConfigFile load_config_file(const std::string& path);

}  // namespace tfish
