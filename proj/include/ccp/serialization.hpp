#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/eval.hpp"
#include "ccp/forecaster.hpp"
#include "ccp/pipeline.hpp"
#include "ccp/search.hpp"

namespace ccp {

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InvalidParam("unknown key '" + key + "' in " + where);
  }
}

// JSON has no infinity literal; unbounded radii are emitted as null.
inline Json radius_to_json(double r) {
  if (is_unbounded(r)) return nullptr;
  return r;
}

}  // namespace detail

inline Json to_json(const ForecasterSpec& spec) {
  return Json{{"kind", to_string(spec.kind)}, {"ridge_lambda", spec.ridge_lambda}};
}

inline ForecasterSpec forecaster_spec_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"kind", "ridge_lambda"}, "forecaster");
  ForecasterSpec spec;
  if (j.contains("kind")) spec.kind = forecaster_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("ridge_lambda")) spec.ridge_lambda = j.at("ridge_lambda").get<double>();
  spec.validate();
  return spec;
}

inline Json to_json(const SplitSpec& spec) {
  return Json{{"train_fraction", spec.train_fraction},
              {"cal_fraction", spec.cal_fraction},
              {"test_fraction", spec.test_fraction},
              {"cal_split_fraction", spec.cal_split_fraction},
              {"seed", spec.seed}};
}

inline SplitSpec split_spec_from_json(const Json& j) {
  detail::reject_unknown_keys(
      j, {"train_fraction", "cal_fraction", "test_fraction", "cal_split_fraction", "seed"},
      "split");
  SplitSpec spec;
  if (j.contains("train_fraction")) spec.train_fraction = j.at("train_fraction").get<double>();
  if (j.contains("cal_fraction")) spec.cal_fraction = j.at("cal_fraction").get<double>();
  if (j.contains("test_fraction")) spec.test_fraction = j.at("test_fraction").get<double>();
  if (j.contains("cal_split_fraction"))
    spec.cal_split_fraction = j.at("cal_split_fraction").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

inline Json to_json(const SgdConfig& cfg) {
  return Json{{"steps", cfg.steps},
              {"learning_rate", cfg.learning_rate},
              {"temperature", cfg.temperature},
              {"seed", cfg.seed}};
}

inline SgdConfig sgd_config_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"steps", "learning_rate", "temperature", "seed"}, "sgd");
  SgdConfig cfg;
  if (j.contains("steps")) cfg.steps = j.at("steps").get<std::size_t>();
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("temperature")) cfg.temperature = j.at("temperature").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

inline Json model_to_json(const CalibratedModel& model) {
  Json j;
  j["method"] = to_string(model.thresholds.method);
  j["alpha"] = model.alpha;
  Json thresholds = Json::array();
  for (double r : model.thresholds.s_star) thresholds.push_back(detail::radius_to_json(r));
  j["thresholds"] = thresholds;
  j["alpha_j"] = model.thresholds.alpha_j;
  j["split_sizes"] = Json{{"train", model.meta.n_train},
                          {"cal1", model.meta.n_cal1},
                          {"cal2", model.meta.n_cal2},
                          {"test", model.meta.n_test}};
  j["seed"] = model.meta.seed;
  return j;
}

inline Json region_to_json(const std::string& series_id, double alpha,
                           const ConfidenceRegion& region) {
  Json steps = Json::array();
  for (std::size_t j = 0; j < region.steps(); ++j) {
    Json step;
    step["center"] = region.centers.row(j);
    step["radius"] = detail::radius_to_json(region.radii[j]);
    step["unbounded"] = is_unbounded(region.radii[j]);
    steps.push_back(step);
  }
  return Json{{"series_id", series_id}, {"alpha", alpha}, {"steps", steps}};
}

inline Json regions_to_json(const std::vector<std::string>& ids,
                            const std::vector<ConfidenceRegion>& regions, double alpha) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < regions.size(); ++i)
    arr.push_back(region_to_json(ids[i], alpha, regions[i]));
  return Json{{"alpha", alpha}, {"regions", arr}};
}

inline void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ccp
