#include "bmp/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace bmp {

using nlohmann::json;

namespace {

json feature_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd feature_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

json model_to_json(const Model& model, const json& meta) {
  json doc;
  doc["dims"] = model.dims;
  json atoms = json::array();
  for (const Atom& atom : model.atoms) {
    json a;
    a["modes"] = atom.subset.modes();
    a["z"] = code_to_bitstring(atom.code);
    a["v"] = feature_to_json(atom.feature);
    atoms.push_back(std::move(a));
  }
  doc["atoms"] = std::move(atoms);
  json coeffs = json::array();
  for (Eigen::Index i = 0; i < model.coeffs.size(); ++i) coeffs.push_back(model.coeffs[i]);
  doc["coeffs"] = std::move(coeffs);
  doc["meta"] = meta.is_null() ? json::object() : meta;
  return doc;
}

ModelDocument model_from_json(const json& doc) {
  ModelDocument out;
  out.model.dims = doc.at("dims").get<Dims>();
  for (const json& a : doc.at("atoms")) {
    Atom atom;
    atom.subset = ModeSubset(a.at("modes").get<std::vector<int>>());
    atom.code = bitstring_to_code(a.at("z").get<std::string>());
    atom.feature = feature_from_json(a.at("v"));
    out.model.atoms.push_back(std::move(atom));
  }
  const json& coeffs = doc.at("coeffs");
  out.model.coeffs.resize(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    out.model.coeffs[static_cast<Eigen::Index>(i)] = coeffs[i].get<double>();
  if (out.model.atoms.size() != static_cast<std::size_t>(out.model.coeffs.size()))
    throw std::runtime_error("model document: atom and coefficient counts differ");
  out.meta = doc.contains("meta") ? doc.at("meta") : json::object();
  return out;
}

void write_model(const std::string& path, const Model& model, const json& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << model_to_json(model, meta).dump(2) << '\n';
  if (!f) throw std::runtime_error("model write failed: " + path);
}

ModelDocument read_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  json doc = json::parse(f);
  return model_from_json(doc);
}

json fit_config_to_json(const FitConfig& cfg) {
  json j;
  j["max_atoms"] = cfg.max_atoms;
  j["stop_tol"] = cfg.stop_tol;
  j["ridge"] = cfg.ridge;
  j["duplicate_retry_budget"] = cfg.duplicate_retry_budget;
  j["sdp"] = {{"rank", cfg.sdp.rank},
              {"max_sweeps", cfg.sdp.max_sweeps},
              {"tol", cfg.sdp.tol},
              {"rounding_trials", cfg.sdp.rounding_trials},
              {"one_opt", cfg.sdp.one_opt},
              {"exhaustive", cfg.sdp.exhaustive}};
  return j;
}

FitConfig fit_config_from_json(const json& j) {
  FitConfig cfg;
  cfg.max_atoms = j.value("max_atoms", cfg.max_atoms);
  cfg.stop_tol = j.value("stop_tol", cfg.stop_tol);
  cfg.ridge = j.value("ridge", cfg.ridge);
  cfg.duplicate_retry_budget = j.value("duplicate_retry_budget", cfg.duplicate_retry_budget);
  if (j.contains("sdp")) {
    const json& s = j.at("sdp");
    cfg.sdp.rank = s.value("rank", cfg.sdp.rank);
    cfg.sdp.max_sweeps = s.value("max_sweeps", cfg.sdp.max_sweeps);
    cfg.sdp.tol = s.value("tol", cfg.sdp.tol);
    cfg.sdp.rounding_trials = s.value("rounding_trials", cfg.sdp.rounding_trials);
    cfg.sdp.one_opt = s.value("one_opt", cfg.sdp.one_opt);
    cfg.sdp.exhaustive = s.value("exhaustive", cfg.sdp.exhaustive);
  }
  return cfg;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const FitTrace& trace) {
  out << "iter,objective,partition,score,c_l1,rmse\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << format_double(r.objective) << ',' << r.partition_index
        << ',' << format_double(r.score) << ',' << format_double(r.coeff_l1) << ',';
    if (!std::isnan(r.rmse)) out << format_double(r.rmse);
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const FitTrace& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_trace_csv(f, trace);
  if (!f) throw std::runtime_error("trace write failed: " + path);
}

Partition parse_partitions(const std::string& text, std::size_t mode_count) {
  std::vector<ModeSubset> subsets;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    if (group.empty()) throw std::invalid_argument("partition: empty subset in \"" + text + "\"");
    std::vector<int> modes;
    std::stringstream gs(group);
    std::string token;
    while (std::getline(gs, token, ',')) {
      std::size_t pos = 0;
      int mode = 0;
      try {
        mode = std::stoi(token, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("partition: bad mode index \"" + token + "\"");
      }
      if (pos != token.size())
        throw std::invalid_argument("partition: bad mode index \"" + token + "\"");
      modes.push_back(mode);
    }
    subsets.emplace_back(std::move(modes));  // validates ordering/nonemptiness
  }
  Partition partition(std::move(subsets));   // rejects duplicates
  partition.validate_for(mode_count);
  return partition;
}

std::string format_partitions(const Partition& partition) {
  std::string out;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (i) out += ';';
    const auto& modes = partition.subsets()[i].modes();
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(modes[j]);
    }
  }
  return out;
}

std::string code_to_bitstring(const std::vector<std::uint8_t>& code) {
  std::string bits(code.size(), '0');
  for (std::size_t i = 0; i < code.size(); ++i)
    if (code[i]) bits[i] = '1';
  return bits;
}

std::vector<std::uint8_t> bitstring_to_code(const std::string& bits) {
  std::vector<std::uint8_t> code(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1')
      throw std::invalid_argument("bitstring must contain only 0/1");
    code[i] = bits[i] == '1' ? 1 : 0;
  }
  return code;
}

}  // namespace bmp
