#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hok/errors.hpp"
#include "hok/sequence.hpp"

namespace hok {

struct Dataset {
  std::vector<std::string> classes;
  int dim = 0;  // d, length of every score row
  std::vector<ScoreSequence> sequences;
};

// Writes content to path atomically (temp file + rename).
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

// Dataset files are JSON lines: a header {"classes": [...], "d": int}
// followed by one {"id", "label", "scores"} object per sequence.
inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");

  Dataset ds;
  std::string line;
  int line_no = 0;
  std::unordered_map<std::string, int> class_index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("dataset '" + path + "' line " + std::to_string(line_no) +
                            ": " + e.what());
    }
    try {
      if (line_no == 1) {
        ds.classes = j.at("classes").get<std::vector<std::string>>();
        ds.dim = j.at("d").get<int>();
        if (ds.classes.empty())
          throw ValidationError("dataset header declares no classes");
        if (ds.dim < 2) throw ValidationError("dataset header: d must be >= 2");
        for (std::size_t i = 0; i < ds.classes.size(); ++i)
          class_index[ds.classes[i]] = static_cast<int>(i);
        continue;
      }
      ScoreSequence seq;
      seq.id = j.at("id").get<std::string>();
      const std::string label = j.at("label").get<std::string>();
      auto it = class_index.find(label);
      if (it == class_index.end())
        throw ValidationError("label '" + label + "' is not in the declared class list");
      seq.label = it->second;
      const auto& rows = j.at("scores");
      if (!rows.is_array() || rows.empty())
        throw ValidationError("scores must be a non-empty array");
      seq.scores.resize(static_cast<Eigen::Index>(rows.size()), ds.dim);
      for (std::size_t t = 0; t < rows.size(); ++t) {
        if (static_cast<int>(rows.at(t).size()) != ds.dim)
          throw ValidationError("scores row " + std::to_string(t) + " has length " +
                                std::to_string(rows.at(t).size()) + ", expected " +
                                std::to_string(ds.dim));
        for (int c = 0; c < ds.dim; ++c)
          seq.scores(static_cast<Eigen::Index>(t), c) = rows.at(t).at(c).get<double>();
      }
      validate_sequence(seq);
      ds.sequences.push_back(std::move(seq));
    } catch (const Error&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("dataset '" + path + "' line " + std::to_string(line_no) +
                            ": " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("dataset '" + path + "' line " + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  if (line_no == 0) throw ValidationError("dataset '" + path + "': file is empty");
  return ds;
}

inline std::string dataset_to_jsonl(const Dataset& ds) {
  std::ostringstream out;
  nlohmann::json header;
  header["classes"] = ds.classes;
  header["d"] = ds.dim;
  out << header.dump() << '\n';
  for (const auto& seq : ds.sequences) {
    nlohmann::json j;
    j["id"] = seq.id;
    j["label"] = ds.classes.at(static_cast<std::size_t>(seq.label));
    auto& rows = j["scores"] = nlohmann::json::array();
    for (int t = 0; t < seq.scores.rows(); ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < seq.scores.cols(); ++c) row.push_back(seq.scores(t, c));
      rows.push_back(std::move(row));
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  atomic_write(path, dataset_to_jsonl(ds));
}

}  // namespace hok
