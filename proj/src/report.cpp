// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tgif/error.hpp"
#include "tgif/hash.hpp"

namespace tgif {

EvalRecord score_example(const std::string& scene_id, const std::string& model_id, int K,
                         std::optional<int> group_id, std::span<const double> mixture,
                         std::span<const double> dry_target, std::span<const double> estimate) {
  EvalRecord r;
  r.scene_id = scene_id;
  r.model_id = model_id;
  r.K = K;
  r.group_id = group_id;
  r.input_si_sdr_db = clamp_db(si_sdr(mixture, dry_target));
  r.input_sdr_db = clamp_db(input_sdr(mixture, dry_target));
  r.output_si_sdr_db = clamp_db(si_sdr(estimate, dry_target));
  r.si_sdri_db = r.output_si_sdr_db - r.input_si_sdr_db;
  return r;
}

void to_json(Json& j, const EvalRecord& r) {
  j = Json{{"scene_id", r.scene_id}, {"model_id", r.model_id}, {"K", r.K}};
  j["group_id"] = r.group_id ? Json(*r.group_id) : Json(nullptr);
  if (r.ok()) {
    j["input_si_sdr_db"] = r.input_si_sdr_db;
    j["input_sdr_db"] = r.input_sdr_db;
    j["output_si_sdr_db"] = r.output_si_sdr_db;
    j["si_sdri_db"] = r.si_sdri_db;
  } else {
    j["error"] = r.error;
  }
}

void from_json(const Json& j, EvalRecord& r) {
  r.scene_id = j.at("scene_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.K = j.at("K").get<int>();
  r.group_id.reset();
  if (j.contains("group_id") && !j.at("group_id").is_null()) r.group_id = j.at("group_id").get<int>();
  if (j.contains("error")) {
    r.error = j.at("error").get<std::string>();
    return;
  }
  r.input_si_sdr_db = j.at("input_si_sdr_db").get<double>();
  r.input_sdr_db = j.at("input_sdr_db").get<double>();
  r.output_si_sdr_db = j.at("output_si_sdr_db").get<double>();
  r.si_sdri_db = j.at("si_sdri_db").get<double>();
}

std::string serialize_records(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += Json(r).dump();
    out += '\n';
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
  write_text(path, serialize_records(records));
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line).get<EvalRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-manifest", path.string() + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Sorting before summing makes the mean independent of record order.
double stable_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long double sum = 0.0L;
  for (double x : v) sum += x;
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string fmt_delta(double v) {
  std::string s = fmt(v, "%+.2f");
  if (s == "-0.00") s = "+0.00";
  return s;
}

void check_model_id(const std::string& id) {
  if (id.empty() || id.find_first_of(",\"\n") != std::string::npos) {
    throw Error("bad-input", "model id '" + id + "' must be non-empty without commas or quotes");
  }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty() || s == "n/a") return std::nullopt;
  return std::stod(s);
}

}  // namespace

const std::array<std::string, kBucketCount>& bucket_names() {
  static const std::array<std::string, kBucketCount> kNames{"overall", "K1", "K2", "K3", "K4", "K5"};
  return kNames;
}

const std::array<KCell, kBucketCount>& KTable::row(const std::string& model) const {
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i] == model) return rows[i];
  }
  throw Error("bad-input", "no row for model '" + model + "'");
}

KTable breakdown_by_k(const std::vector<EvalRecord>& records, const std::vector<std::string>& order) {
  std::map<std::string, std::array<std::pair<std::vector<double>, std::vector<double>>, kBucketCount>> acc;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    if (r.K < 1 || r.K > kMaxSpeakers) throw Error("bad-input", "K out of range in " + r.scene_id);
    auto& buckets = acc[r.model_id];
    for (std::size_t b : {std::size_t{0}, static_cast<std::size_t>(r.K)}) {
      buckets[b].first.push_back(r.output_si_sdr_db);
      buckets[b].second.push_back(r.si_sdri_db);
    }
  }
  if (acc.empty()) throw Error("empty-signal", "no scored records to tabulate");

  KTable table;
  for (const auto& m : order) {
    if (acc.count(m) != 0 && std::find(table.models.begin(), table.models.end(), m) == table.models.end()) {
      table.models.push_back(m);
    }
  }
  for (const auto& [m, _] : acc) {
    if (std::find(table.models.begin(), table.models.end(), m) == table.models.end()) table.models.push_back(m);
  }
  for (const auto& m : table.models) {
    check_model_id(m);
    std::array<KCell, kBucketCount> row;
    const auto& buckets = acc.at(m);
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      row[b].count = buckets[b].first.size();
      if (row[b].count == 0) continue;
      row[b].si_sdr = stable_mean(buckets[b].first);
      row[b].si_sdri = stable_mean(buckets[b].second);
    }
    table.rows.push_back(row);
  }
  return table;
}

void apply_baselines(KTable& table, const std::map<std::string, std::string>& baselines) {
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    auto it = baselines.find(table.models[i]);
    if (it == baselines.end()) continue;
    const auto& base = table.row(it->second);
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      auto& cell = table.rows[i][b];
      cell.delta.reset();
      if (cell.si_sdr && base[b].si_sdr) cell.delta = *cell.si_sdr - *base[b].si_sdr;
    }
  }
}

std::string table_csv(const KTable& table) {
  std::string out = "model";
  for (const auto& name : bucket_names()) {
    out += "," + name + "_si_sdr," + name + "_delta," + name + "_si_sdri";
  }
  out += '\n';
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    check_model_id(table.models[i]);
    out += table.models[i];
    for (const auto& cell : table.rows[i]) {
      out += ',';
      out += cell.si_sdr ? fmt(*cell.si_sdr, "%.2f") : "n/a";
      out += ',';
      if (cell.delta) out += fmt_delta(*cell.delta);
      out += ',';
      out += cell.si_sdri ? fmt(*cell.si_sdri, "%.2f") : "n/a";
    }
    out += '\n';
  }
  return out;
}

std::string table_text(const KTable& table) {
  std::size_t width = 5;
  for (const auto& m : table.models) width = std::max(width, m.size());
  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  out << pad("model", width);
  for (const auto& name : bucket_names()) out << " | " << pad(name, 24);
  out << '\n';
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    out << pad(table.models[i], width);
    for (const auto& cell : table.rows[i]) {
      std::string s = cell.si_sdr ? fmt(*cell.si_sdr, "%.2f") : "n/a";
      if (cell.delta) s += " (" + fmt_delta(*cell.delta) + ")";
      s += " / ";
      s += cell.si_sdri ? fmt(*cell.si_sdri, "%.2f") : "n/a";
      out << " | " << pad(s, 24);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

SdrCurve bin_by_input_sdr(const std::vector<EvalRecord>& records, double bin_width_db) {
  if (!(bin_width_db > 0.0)) throw Error("bad-config", "bin width must be positive");
  std::map<long long, std::size_t> counts;
  std::map<std::string, std::map<long long, std::vector<double>>> values;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    const auto bin = static_cast<long long>(std::floor(r.input_sdr_db / bin_width_db));
    ++counts[bin];
    values[r.model_id][bin].push_back(r.si_sdri_db);
  }
  if (counts.empty()) throw Error("empty-signal", "no scored records to bin");

  SdrCurve curve;
  curve.bin_width_db = bin_width_db;
  for (const auto& [bin, n] : counts) {
    curve.bin_index.push_back(bin);
    curve.counts.push_back(n);
  }
  for (auto& [model, bins] : values) {
    check_model_id(model);
    curve.models.push_back(model);
    std::vector<std::optional<double>> means;
    for (long long bin : curve.bin_index) {
      auto it = bins.find(bin);
      means.push_back(it == bins.end() ? std::nullopt : std::optional<double>(stable_mean(it->second)));
    }
    curve.mean_si_sdri.push_back(std::move(means));
  }
  return curve;
}

std::string curve_csv(const SdrCurve& curve) {
  std::string out = "bin_lo_db,bin_center_db,count";
  for (const auto& m : curve.models) out += "," + m + "_si_sdri";
  out += '\n';
  for (std::size_t i = 0; i < curve.bin_index.size(); ++i) {
    out += fmt(static_cast<double>(curve.bin_index[i]) * curve.bin_width_db, "%.4f");
    out += ',' + fmt(curve.center(i), "%.4f");
    out += ',' + std::to_string(curve.counts[i]);
    for (const auto& series : curve.mean_si_sdri) {
      out += ',';
      out += series[i] ? fmt(*series[i], "%.4f") : "n/a";
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plots

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string num(double v) { return fmt(v, "%.2f"); }

struct Axis {
  double lo, hi;
  double px0, px1;
  double map(double v) const { return hi == lo ? (px0 + px1) / 2 : px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::pair<double, double> padded_range(double lo, double hi) {
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string table_svg_from_csv(const std::string& csv) {
  const auto rows = parse_csv(csv);
  if (rows.size() < 2) throw Error("bad-input", "table CSV has no data rows");
  const std::size_t n_models = rows.size() - 1;
  // Grouped bars of mean SI-SDRi per bucket.
  double lo = 0.0, hi = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      if (auto v = parse_cell(rows[r].at(3 + 3 * b))) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
  }
  std::tie(lo, hi) = padded_range(lo, hi);
  const int width = 720, height = 360;
  Axis y{lo, hi, height - 40.0, 30.0};
  std::string svg = svg_header(width, height);
  svg += "<text x=\"10\" y=\"18\">mean SI-SDRi (dB) by number of speakers</text>\n";
  svg += "<line x1=\"50\" x2=\"" + std::to_string(width - 150) + "\" y1=\"" + num(y.map(0)) + "\" y2=\"" +
         num(y.map(0)) + "\" stroke=\"black\"/>\n";
  const double group_w = (width - 210.0) / kBucketCount;
  const double bar_w = group_w * 0.8 / static_cast<double>(n_models);
  for (std::size_t b = 0; b < kBucketCount; ++b) {
    const double gx = 55.0 + group_w * static_cast<double>(b);
    svg += "<text x=\"" + num(gx + group_w * 0.4) + "\" y=\"" + std::to_string(height - 20) +
           "\" text-anchor=\"middle\">" + bucket_names()[b] + "</text>\n";
    for (std::size_t m = 0; m < n_models; ++m) {
      auto v = parse_cell(rows[m + 1].at(3 + 3 * b));
      if (!v) continue;
      const double y0 = y.map(0), y1 = y.map(*v);
      svg += "<rect x=\"" + num(gx + bar_w * static_cast<double>(m)) + "\" y=\"" + num(std::min(y0, y1)) +
             "\" width=\"" + num(bar_w) + "\" height=\"" + num(std::abs(y1 - y0)) + "\" fill=\"" +
             kPalette[m % 8] + "\"/>\n";
    }
  }
  for (std::size_t m = 0; m < n_models; ++m) {
    const double ly = 40.0 + 16.0 * static_cast<double>(m);
    svg += "<rect x=\"" + std::to_string(width - 140) + "\" y=\"" + num(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
           kPalette[m % 8] + "\"/><text x=\"" + std::to_string(width - 125) + "\" y=\"" + num(ly) + "\">" +
           rows[m + 1].at(0) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string curve_svg_from_csv(const std::string& csv) {
  const auto rows = parse_csv(csv);
  if (rows.size() < 2) throw Error("bad-input", "curve CSV has no data rows");
  const std::size_t n_models = rows[0].size() - 3;
  double xlo = 1e300, xhi = -1e300, ylo = 0.0, yhi = 0.0;
  std::size_t max_count = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double x = std::stod(rows[r].at(1));
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    max_count = std::max<std::size_t>(max_count, std::stoull(rows[r].at(2)));
    for (std::size_t m = 0; m < n_models; ++m) {
      if (auto v = parse_cell(rows[r].at(3 + m))) {
        ylo = std::min(ylo, *v);
        yhi = std::max(yhi, *v);
      }
    }
  }
  std::tie(xlo, xhi) = padded_range(xlo, xhi);
  std::tie(ylo, yhi) = padded_range(ylo, yhi);
  const int width = 720, height = 400;
  Axis x{xlo, xhi, 60.0, width - 160.0};
  Axis y{ylo, yhi, height - 120.0, 30.0};
  Axis hist{0.0, static_cast<double>(max_count), height - 30.0, height - 100.0};
  std::string svg = svg_header(width, height);
  svg += "<text x=\"10\" y=\"18\">SI-SDRi (dB) vs input SDR (dB); bars: record count</text>\n";
  svg += "<line x1=\"60\" x2=\"" + num(width - 160.0) + "\" y1=\"" + num(y.map(0)) + "\" y2=\"" + num(y.map(0)) +
         "\" stroke=\"#999\"/>\n";
  const double bw = std::max(2.0, (x.px1 - x.px0) / static_cast<double>(rows.size()) * 0.8);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double cx = x.map(std::stod(rows[r].at(1)));
    const double top = hist.map(std::stod(rows[r].at(2)));
    svg += "<rect x=\"" + num(cx - bw / 2) + "\" y=\"" + num(top) + "\" width=\"" + num(bw) + "\" height=\"" +
           num(hist.px0 - top) + "\" fill=\"#ccc\"/>\n";
  }
  for (std::size_t m = 0; m < n_models; ++m) {
    std::string points;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      auto v = parse_cell(rows[r].at(3 + m));
      if (!v) continue;
      points += num(x.map(std::stod(rows[r].at(1)))) + "," + num(y.map(*v)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(kPalette[m % 8]) +
           "\" points=\"" + points + "\"/>\n";
    std::string label = rows[0].at(3 + m);
    label = label.substr(0, label.size() - std::string("_si_sdri").size());
    const double ly = 40.0 + 16.0 * static_cast<double>(m);
    svg += "<rect x=\"" + std::to_string(width - 150) + "\" y=\"" + num(ly - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + kPalette[m % 8] + "\"/><text x=\"" +
           std::to_string(width - 135) + "\" y=\"" + num(ly) + "\">" + label + "</text>\n";
  }
  svg += "<text x=\"60\" y=\"" + std::to_string(height - 10) + "\">" + num(xlo) + "</text>\n";
  svg += "<text x=\"" + num(width - 160.0) + "\" y=\"" + std::to_string(height - 10) +
         "\" text-anchor=\"end\">" + num(xhi) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> render_report(const std::filesystem::path& dir, const KTable& table,
                                                 const SdrCurve& curve) {
  const std::vector<std::filesystem::path> paths{dir / "table_k.csv", dir / "curve_input_sdr.csv",
                                                 dir / "table_k.svg", dir / "curve_input_sdr.svg"};
  write_text(paths[0], table_csv(table));
  write_text(paths[1], curve_csv(curve));
  write_text(paths[2], table_svg_from_csv(read_text(paths[0])));
  write_text(paths[3], curve_svg_from_csv(read_text(paths[1])));
  return paths;
}

}  // namespace tgif
