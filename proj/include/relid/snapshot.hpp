#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relid/errors.hpp"
#include "relid/identifier.hpp"
#include "relid/partition.hpp"

namespace relid {

/// Versioned JSON form of a model snapshot. Version 1 layout:
/// relation rows, both partitions (limits, peaks, centers, labels), the
/// error integral, counters, filter stages and the configuration needed to
/// resume identification.
inline nlohmann::json snapshot_to_json(const ModelSnapshot& s) {
  auto partition_json = [](const FuzzyPartition& p) {
    return nlohmann::json{{"init_limit", p.init_limit()},
                          {"current_limit", p.current_limit()},
                          {"peaks", p.peaks()},
                          {"centers", p.centers()},
                          {"labels", default_labels(p.n_sets())}};
  };
  auto matrix_json = [](const RelationalMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& stage : s.filter_stages) stages.push_back(matrix_json(stage));
  return nlohmann::json{
      {"format", "relid-snapshot"},
      {"version", 1},
      {"config",
       {{"alpha", s.config.alpha},
        {"beta", s.config.beta},
        {"gamma", s.config.gamma},
        {"filter_order", s.config.filter_order},
        {"n_sets", s.config.n_sets},
        {"u_init_limit", s.config.u_init_limit},
        {"y_init_limit", s.config.y_init_limit},
        {"dt", s.config.dt},
        {"integral_clamp", s.config.integral_clamp}}},
      {"relation", matrix_json(s.relation)},
      {"input_partition", partition_json(s.input_partition)},
      {"output_partition", partition_json(s.output_partition)},
      {"error_integral", s.error_integral},
      {"sample_count", s.sample_count},
      {"filter_stages", std::move(stages)},
      {"last_measured_y", s.last_measured_y}};
}

inline ModelSnapshot snapshot_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "relid-snapshot" ||
        j.at("version").get<int>() != 1) {
      throw ParseError("snapshot: unsupported format or version");
    }
    auto partition_from = [](const nlohmann::json& pj) {
      return FuzzyPartition::from_parts(pj.at("init_limit").get<double>(),
                                        pj.at("current_limit").get<double>(),
                                        pj.at("peaks").get<std::vector<double>>(),
                                        pj.at("centers").get<std::vector<double>>());
    };
    auto matrix_from = [](const nlohmann::json& mj) {
      return RelationalMatrix(mj.get<std::vector<std::vector<double>>>());
    };
    ModelSnapshot s;
    const auto& cj = j.at("config");
    s.config.alpha = cj.at("alpha").get<double>();
    s.config.beta = cj.at("beta").get<double>();
    s.config.gamma = cj.at("gamma").get<double>();
    s.config.filter_order = cj.at("filter_order").get<int>();
    s.config.n_sets = cj.at("n_sets").get<int>();
    s.config.u_init_limit = cj.at("u_init_limit").get<double>();
    s.config.y_init_limit = cj.at("y_init_limit").get<double>();
    s.config.dt = cj.at("dt").get<double>();
    s.config.integral_clamp = cj.at("integral_clamp").get<double>();
    s.config.validate();
    s.relation = matrix_from(j.at("relation"));
    s.input_partition = partition_from(j.at("input_partition"));
    s.output_partition = partition_from(j.at("output_partition"));
    s.error_integral = j.at("error_integral").get<double>();
    s.sample_count = j.at("sample_count").get<std::uint64_t>();
    for (const auto& stage : j.at("filter_stages")) {
      s.filter_stages.push_back(matrix_from(stage));
    }
    s.last_measured_y = j.at("last_measured_y").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("snapshot: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("snapshot: ") + e.what());
  }
}

inline void save_snapshot(const std::string& path, const ModelSnapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open snapshot file for writing: " + path);
  out << snapshot_to_json(s).dump(2) << "\n";
}

inline ModelSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open snapshot file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return snapshot_from_json(j);
}

}  // namespace relid
