#include "cfx/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfx {

using json = nlohmann::ordered_json;

std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw CfxError("cannot open " + path.string());
  auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected_count * sizeof(float))
    throw CfxError(path.string() + ": expected " + std::to_string(expected_count * sizeof(float)) +
                   " bytes, found " + std::to_string(bytes));
  std::vector<float> out(expected_count);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw CfxError("short read from " + path.string());
  return out;
}

void write_f32(const std::filesystem::path& path, const std::vector<float>& values) {
  atomic_write(path, values.data(), values.size() * sizeof(float));
}

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw CfxError("manifest.json: " + std::string(e.what()));
  }

  Dataset d;
  std::size_t n_records = manifest.at("n_records").get<std::size_t>();
  int t = manifest.at("n_timesteps").get<int>();
  int c = manifest.at("n_channels").get<int>();
  d.class_names = manifest.at("classes").get<std::vector<std::string>>();
  d.stats.mu = manifest.at("mu").get<double>();
  d.stats.sigma = manifest.at("sigma").get<double>();

  std::size_t per_record = static_cast<std::size_t>(t) * static_cast<std::size_t>(c);
  std::vector<float> raw = read_f32(dir / "signals.f32", n_records * per_record);

  std::ifstream labels_in(dir / "labels.csv");
  if (!labels_in) throw CfxError("cannot open " + (dir / "labels.csv").string());
  std::string line;
  std::size_t row = 0;
  while (std::getline(labels_in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (row >= n_records) throw CfxError("labels.csv: more rows than n_records");
    auto comma = line.find(',');
    if (comma == std::string::npos) throw CfxError("labels.csv row " + std::to_string(row) + ": missing comma");
    Series s(line.substr(0, comma), t, c);
    std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(row * per_record), per_record, s.values.begin());
    validate_series(s);

    LabelVec lv(d.class_names.size());
    std::string field = line.substr(comma + 1);
    std::stringstream fs(field);
    std::string name;
    while (std::getline(fs, name, ';')) {
      if (name.empty()) continue;
      int idx = -1;
      for (std::size_t i = 0; i < d.class_names.size(); ++i)
        if (d.class_names[i] == name) idx = static_cast<int>(i);
      if (idx < 0) throw CfxError("labels.csv row " + std::to_string(row) + ": unknown class " + name);
      lv.set(static_cast<std::size_t>(idx));
    }
    d.records.push_back(std::move(s));
    d.labels.push_back(std::move(lv));
    ++row;
  }
  if (row != n_records)
    throw CfxError("labels.csv: found " + std::to_string(row) + " rows, manifest says " +
                   std::to_string(n_records));
  validate_dataset(d);
  return d;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& d) {
  validate_dataset(d);
  std::filesystem::create_directories(dir);

  json manifest;
  manifest["n_records"] = d.records.size();
  manifest["n_timesteps"] = d.n_timesteps();
  manifest["n_channels"] = d.n_channels();
  manifest["classes"] = d.class_names;
  manifest["mu"] = d.stats.mu;
  manifest["sigma"] = d.stats.sigma;
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");

  std::vector<float> raw;
  raw.reserve(d.records.size() * d.records.front().size());
  for (const Series& s : d.records) raw.insert(raw.end(), s.values.begin(), s.values.end());
  write_f32(dir / "signals.f32", raw);

  std::string csv;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    csv += d.records[i].record_id;
    csv += ',';
    bool first = true;
    for (std::size_t l = 0; l < d.labels[i].size(); ++l) {
      if (!d.labels[i].test(l)) continue;
      if (!first) csv += ';';
      csv += d.class_names[l];
      first = false;
    }
    csv += '\n';
  }
  atomic_write(dir / "labels.csv", csv);
}

}  // namespace cfx
