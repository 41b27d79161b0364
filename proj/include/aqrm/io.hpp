#pragma once

// Text formats: full-precision CSV bodies for sweep and spectrum tables,
// density-matrix JSON, sweep-specification JSON parsing, and the provenance
// sidecar. Every floating-point value is printed with 17 significant digits
// so a text round trip reproduces the binary value exactly; CSV bodies are
// therefore bit-identical across reruns.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aqrm/sweep.hpp"
#include "aqrm/types.hpp"
#include "json.hpp"

namespace aqrm::io {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kQuantifyCsvVersion = "aqrm-quantify-csv-v1";
inline constexpr const char* kSpectrumCsvVersion = "aqrm-spectrum-csv-v1";
inline constexpr const char* kQuantifyColumns =
    "lambda1,lambda2,T,g2_dressed,g2_bare,zeta2,macroscopicity,negativity,discord,"
    "fock_cutoff,flags";

inline std::string quantify_csv_header() {
  return std::string("# ") + kQuantifyCsvVersion + "\n" + kQuantifyColumns + "\n";
}

namespace detail {

inline std::string cell(const std::optional<double>& v) {
  return v.has_value() ? format_full(*v) : "nan";
}

inline std::string cell(bool selected, double v) {
  return selected ? format_full(v) : "nan";
}

}  // namespace detail

inline std::string quantify_csv_row(const QuantifyRow& row, const QuantifierSelection& sel) {
  const QuantifierReport& rep = row.report;
  const bool ok = row.ok;
  std::string line;
  line += format_full(row.lambda1);
  line += ',';
  line += format_full(row.lambda2);
  line += ',';
  line += format_full(row.temperature);
  line += ',';
  line += ok && sel.g2_dressed ? detail::cell(rep.g2_dressed) : "nan";
  line += ',';
  line += ok && sel.g2_bare ? detail::cell(rep.g2_bare) : "nan";
  line += ',';
  line += ok ? detail::cell(sel.squeezing, rep.squeezing) : "nan";
  line += ',';
  line += ok ? detail::cell(sel.macroscopicity, rep.macroscopicity) : "nan";
  line += ',';
  line += ok ? detail::cell(sel.negativity, rep.negativity) : "nan";
  line += ',';
  line += ok && sel.discord && rep.discord.has_value() ? format_full(rep.discord->value) : "nan";
  line += ',';
  line += std::to_string(row.cutoff);
  line += ',';
  line += row.flags;
  line += '\n';
  return line;
}

inline std::string quantify_csv(const SweepResult& result) {
  std::string body = quantify_csv_header();
  for (const auto& row : result.rows) body += quantify_csv_row(row, result.spec.selection);
  return body;
}

// Spectrum tables hold gaps above the ground level, so the E0 column is
// identically zero and Ek means E_k - E_0.
inline std::string spectrum_csv_header(int levels) {
  std::string h = std::string("# ") + kSpectrumCsvVersion + "\n" + "lambda";
  for (int k = 0; k < levels; ++k) h += ",E" + std::to_string(k);
  for (int k = 0; k < levels; ++k) h += ",parity" + std::to_string(k);
  h += '\n';
  return h;
}

inline std::string spectrum_csv(const SweepResult& result) {
  const int levels = result.spectrum_rows.empty()
                         ? result.spec.levels
                         : static_cast<int>(result.spectrum_rows.front().gaps.size());
  std::string body = spectrum_csv_header(levels);
  for (const auto& row : result.spectrum_rows) {
    body += format_full(row.lambda);
    for (int k = 0; k < levels; ++k) {
      body += ',';
      body += k < static_cast<int>(row.gaps.size()) ? format_full(row.gaps[static_cast<size_t>(k)])
                                                    : "nan";
    }
    for (int k = 0; k < levels; ++k) {
      body += ',';
      body += k < static_cast<int>(row.parities.size())
                  ? std::to_string(row.parities[static_cast<size_t>(k)])
                  : "nan";
    }
    body += '\n';
  }
  return body;
}

// Density matrix <-> JSON {dim, entries_re, entries_im}, row-major.
inline nlohmann::ordered_json density_to_json(const Operator& rho) {
  const int d = static_cast<int>(rho.rows());
  if (rho.cols() != d) throw std::invalid_argument("density_to_json: matrix must be square");
  nlohmann::ordered_json j;
  j["dim"] = d;
  std::vector<double> re, im;
  re.reserve(static_cast<size_t>(d) * d);
  im.reserve(static_cast<size_t>(d) * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      re.push_back(rho(r, c).real());
      im.push_back(rho(r, c).imag());
    }
  j["entries_re"] = re;
  j["entries_im"] = im;
  return j;
}

inline Operator density_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries_re") ||
      !j.contains("entries_im"))
    throw std::invalid_argument("density_from_json: need dim, entries_re, entries_im");
  const int d = j.at("dim").get<int>();
  if (d < 1) throw std::invalid_argument("density_from_json: dim must be positive");
  const auto re = j.at("entries_re").get<std::vector<double>>();
  const auto im = j.at("entries_im").get<std::vector<double>>();
  const size_t n = static_cast<size_t>(d) * static_cast<size_t>(d);
  if (re.size() != n || im.size() != n)
    throw std::invalid_argument("density_from_json: entry arrays must hold dim^2 values");
  Operator rho(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const size_t k = static_cast<size_t>(r) * d + c;
      rho(r, c) = Complex(re[k], im[k]);
    }
  return rho;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_density_json(const std::string& path, const Operator& rho) {
  write_text_file(path, density_to_json(rho).dump(2) + "\n");
}

inline Operator read_density_json(const std::string& path) {
  return density_from_json(nlohmann::json::parse(read_text_file(path)));
}

// Sweep specification JSON
//
// {
//   "mode": "spectrum" | "quantify_1d" | "quantify_2d",
//   "swept": "lambda1" | "lambda2",
//   "ratio": 0.5,                    or "ratios": [0, 0.25, 0.5]
//   "coupling_grid": [..],           or {"start": 0, "stop": 4, "points": 201}
//   "temperature_grid": [..],        or {"start": .., ..} or "temperature": 0.1
//   "pairs": [[l1, l2], ..],         explicit couplings, replaces ratio x grid
//   "model": {"omega": 1, "delta": 1, "cutoff": 0},
//   "bath": {"alpha": 0.01, "omega_c": 50},
//   "quantifiers": ["negativity", ..],  omitted means all six
//   "levels": 6,
//   "seed": 0
// }
namespace detail {

inline std::vector<double> parse_grid(const nlohmann::json& j, const char* what) {
  if (j.is_array()) {
    auto g = j.get<std::vector<double>>();
    return g;
  }
  if (j.is_object()) {
    for (const auto& [key, _] : j.items())
      if (key != "start" && key != "stop" && key != "points")
        throw std::invalid_argument(std::string("sweep spec: unknown key in ") + what + ": " +
                                    key);
    if (!j.contains("start") || !j.contains("stop") || !j.contains("points"))
      throw std::invalid_argument(std::string("sweep spec: ") + what +
                                  " object needs start, stop, points");
    return linspace(j.at("start").get<double>(), j.at("stop").get<double>(),
                    j.at("points").get<int>());
  }
  throw std::invalid_argument(std::string("sweep spec: ") + what +
                              " must be an array or a {start, stop, points} object");
}

}  // namespace detail

inline SweepSpec parse_sweep_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("sweep spec: top level must be an object");
  static const std::vector<std::string> known{
      "mode",  "swept", "ratio",       "ratios", "coupling_grid", "temperature_grid",
      "temperature", "pairs", "model", "bath",   "quantifiers",   "levels", "seed"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("sweep spec: unknown key: " + key);

  SweepSpec spec;
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "spectrum")
      spec.mode = SweepMode::spectrum;
    else if (m == "quantify_1d")
      spec.mode = SweepMode::quantify_1d;
    else if (m == "quantify_2d")
      spec.mode = SweepMode::quantify_2d;
    else
      throw std::invalid_argument("sweep spec: unknown mode: " + m);
  }
  if (j.contains("swept")) {
    const auto s = j.at("swept").get<std::string>();
    if (s == "lambda1" || s == "l1")
      spec.swept = Coupling::lambda1;
    else if (s == "lambda2" || s == "l2")
      spec.swept = Coupling::lambda2;
    else
      throw std::invalid_argument("sweep spec: unknown swept coupling: " + s);
  }
  if (j.contains("ratio") && j.contains("ratios"))
    throw std::invalid_argument("sweep spec: give either ratio or ratios, not both");
  if (j.contains("ratio")) spec.ratios = {j.at("ratio").get<double>()};
  if (j.contains("ratios")) spec.ratios = j.at("ratios").get<std::vector<double>>();
  if (j.contains("coupling_grid"))
    spec.coupling_grid = detail::parse_grid(j.at("coupling_grid"), "coupling_grid");
  if (j.contains("temperature") && j.contains("temperature_grid"))
    throw std::invalid_argument(
        "sweep spec: give either temperature or temperature_grid, not both");
  if (j.contains("temperature")) {
    spec.temperature_grid = {j.at("temperature").get<double>()};
  } else if (j.contains("temperature_grid")) {
    spec.temperature_grid = detail::parse_grid(j.at("temperature_grid"), "temperature_grid");
  } else if (spec.mode == SweepMode::quantify_2d) {
    spec.temperature_grid = default_temperature_grid();
  }
  if (j.contains("pairs")) {
    for (const auto& p : j.at("pairs")) {
      if (!p.is_array() || p.size() != 2)
        throw std::invalid_argument("sweep spec: each pair must be [lambda1, lambda2]");
      spec.pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    for (const auto& [key, _] : m.items())
      if (key != "omega" && key != "delta" && key != "cutoff")
        throw std::invalid_argument("sweep spec: unknown key in model: " + key);
    if (m.contains("omega")) spec.model.omega = m.at("omega").get<double>();
    if (m.contains("delta")) spec.model.delta = m.at("delta").get<double>();
    if (m.contains("cutoff")) spec.model.cutoff = m.at("cutoff").get<int>();
  }
  if (j.contains("bath")) {
    const auto& b = j.at("bath");
    for (const auto& [key, _] : b.items())
      if (key != "alpha" && key != "omega_c")
        throw std::invalid_argument("sweep spec: unknown key in bath: " + key);
    const double alpha = b.contains("alpha") ? b.at("alpha").get<double>() : 0.01;
    const double omega_c =
        b.contains("omega_c") ? b.at("omega_c").get<double>() : 50.0 * spec.model.omega;
    spec.bath = BathParams::symmetric(alpha, omega_c, spec.temperature_grid.front());
  }
  if (j.contains("quantifiers")) {
    QuantifierSelection sel;
    sel.g2_dressed = sel.g2_bare = sel.squeezing = false;
    sel.macroscopicity = sel.negativity = sel.discord = false;
    for (const auto& q : j.at("quantifiers")) {
      const auto name = q.get<std::string>();
      if (name == "g2_dressed")
        sel.g2_dressed = true;
      else if (name == "g2_bare")
        sel.g2_bare = true;
      else if (name == "zeta2" || name == "squeezing")
        sel.squeezing = true;
      else if (name == "macroscopicity")
        sel.macroscopicity = true;
      else if (name == "negativity")
        sel.negativity = true;
      else if (name == "discord")
        sel.discord = true;
      else
        throw std::invalid_argument("sweep spec: unknown quantifier: " + name);
    }
    spec.selection = sel;
  }
  if (j.contains("levels")) spec.levels = j.at("levels").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<unsigned>();
  spec.validate();
  return spec;
}

inline SweepSpec parse_sweep_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep spec: JSON parse error: ") + e.what());
  }
  return parse_sweep_spec(j);
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  return parse_sweep_spec(read_text_file(path));
}

// Canonical text form of a spec; its FNV-1a hash identifies the run in the
// provenance sidecar.
inline std::string canonical_spec_string(const SweepSpec& spec) {
  std::string s;
  s += "mode=";
  s += spec.mode == SweepMode::spectrum ? "spectrum"
       : spec.mode == SweepMode::quantify_1d ? "quantify_1d"
                                             : "quantify_2d";
  s += ";swept=";
  s += spec.swept == Coupling::lambda1 ? "lambda1" : "lambda2";
  s += ";ratios=";
  for (double r : spec.ratios) s += format_full(r) + ",";
  s += ";couplings=";
  for (double c : spec.coupling_grid) s += format_full(c) + ",";
  s += ";temperatures=";
  for (double t : spec.temperature_grid) s += format_full(t) + ",";
  s += ";pairs=";
  for (const auto& [l1, l2] : spec.pairs) s += format_full(l1) + ":" + format_full(l2) + ",";
  s += ";omega=" + format_full(spec.model.omega);
  s += ";delta=" + format_full(spec.model.delta);
  s += ";cutoff=" + std::to_string(spec.model.cutoff);
  s += ";alpha_boson=" + format_full(spec.bath.alpha_boson);
  s += ";alpha_qubit=" + format_full(spec.bath.alpha_qubit);
  s += ";omega_c=" + format_full(spec.bath.omega_c);
  s += ";selection=";
  s += spec.selection.g2_dressed ? "1" : "0";
  s += spec.selection.g2_bare ? "1" : "0";
  s += spec.selection.squeezing ? "1" : "0";
  s += spec.selection.macroscopicity ? "1" : "0";
  s += spec.selection.negativity ? "1" : "0";
  s += spec.selection.discord ? "1" : "0";
  s += ";levels=" + std::to_string(spec.levels);
  s += ";seed=" + std::to_string(spec.seed);
  return s;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string spec_hash_hex(const SweepSpec& spec) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_spec_string(spec))));
  return buf;
}

// Sidecar with everything a rerun needs to audit a CSV: spec hash, per-row
// cutoffs, failure count, wall time, worker count. Timing lives here so CSV
// bodies stay bit-identical across runs.
inline nlohmann::ordered_json provenance_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["format"] = result.spec.mode == SweepMode::spectrum ? kSpectrumCsvVersion
                                                        : kQuantifyCsvVersion;
  j["spec_hash"] = spec_hash_hex(result.spec);
  j["workers"] = result.workers;
  j["wall_ms"] = result.wall_ms;
  j["entropy_base"] = "nats";
  if (result.spec.mode == SweepMode::spectrum) {
    j["rows_total"] = result.spectrum_rows.size();
    j["rows_failed"] = 0;
    std::vector<int> cutoffs;
    cutoffs.reserve(result.spectrum_rows.size());
    for (const auto& r : result.spectrum_rows) cutoffs.push_back(r.cutoff);
    j["cutoffs"] = cutoffs;
  } else {
    j["rows_total"] = result.rows.size();
    j["rows_failed"] = result.failed_count();
    std::vector<int> cutoffs;
    cutoffs.reserve(result.rows.size());
    for (const auto& r : result.rows) cutoffs.push_back(r.cutoff);
    j["cutoffs"] = cutoffs;
  }
  return j;
}

// One quantify point as a JSON object; missing quantifiers are null and the
// flag tokens say why.
inline nlohmann::ordered_json quantify_row_json(const QuantifyRow& row,
                                                const QuantifierSelection& sel) {
  nlohmann::ordered_json j;
  j["lambda1"] = row.lambda1;
  j["lambda2"] = row.lambda2;
  j["T"] = row.temperature;
  const auto put = [&](const char* key, bool present, double v) {
    if (present)
      j[key] = v;
    else
      j[key] = nullptr;
  };
  const QuantifierReport& rep = row.report;
  put("g2_dressed", row.ok && sel.g2_dressed && rep.g2_dressed.has_value(),
      rep.g2_dressed.value_or(0));
  put("g2_bare", row.ok && sel.g2_bare && rep.g2_bare.has_value(), rep.g2_bare.value_or(0));
  put("zeta2", row.ok && sel.squeezing, rep.squeezing);
  put("macroscopicity", row.ok && sel.macroscopicity, rep.macroscopicity);
  put("negativity", row.ok && sel.negativity, rep.negativity);
  put("discord", row.ok && sel.discord && rep.discord.has_value(),
      row.ok && rep.discord.has_value() ? rep.discord->value : 0);
  j["mean_occupation"] = row.ok ? nlohmann::ordered_json(rep.mean_occupation)
                                : nlohmann::ordered_json(nullptr);
  j["fock_cutoff"] = row.cutoff;
  std::vector<std::string> tokens;
  if (!row.flags.empty()) {
    std::stringstream ss(row.flags);
    std::string tok;
    while (std::getline(ss, tok, ';')) tokens.push_back(tok);
  }
  j["flags"] = tokens;
  nlohmann::ordered_json conv;
  conv["fock_cutoff"] = row.cutoff;
  if (row.ok && rep.discord.has_value()) {
    conv["discord_evaluations"] = rep.discord->evaluations;
    conv["discord_grid_value"] = rep.discord->grid_value;
  }
  j["convergence"] = conv;
  return j;
}

}  // namespace aqrm::io
