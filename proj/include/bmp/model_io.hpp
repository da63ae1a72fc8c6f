#pragma once

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>

#include "bmp/engine.hpp"

namespace bmp {

// Model document: {dims, atoms:[{modes, z:"bitstring", v:[...]}], coeffs,
// meta:{seed, config}}. Serialization is deterministic (sorted keys, shortest
// round-trip floats), so read + write reproduces a file byte-identically.
nlohmann::json model_to_json(const Model& model, const nlohmann::json& meta);

struct ModelDocument {
  Model model;
  nlohmann::json meta;
};

ModelDocument model_from_json(const nlohmann::json& doc);

void write_model(const std::string& path, const Model& model, const nlohmann::json& meta);
ModelDocument read_model(const std::string& path);

nlohmann::json fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);

// Trace CSV, header: iter,objective,partition,score,c_l1,rmse. The rmse cell
// is empty when no truth was supplied.
void write_trace_csv(std::ostream& out, const FitTrace& trace);
void write_trace_csv(const std::string& path, const FitTrace& trace);

// Partition grammar: subsets separated by ';', 1-based mode indices within a
// subset separated by ',' ("1;2;3", "1,2;3").
Partition parse_partitions(const std::string& text, std::size_t mode_count);
std::string format_partitions(const Partition& partition);

std::string code_to_bitstring(const std::vector<std::uint8_t>& code);
std::vector<std::uint8_t> bitstring_to_code(const std::string& bits);

}  // namespace bmp
