#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

#include "bqlab/experiments.hpp"

#ifndef BQLAB_VERSION
#define BQLAB_VERSION "unknown"
#endif

namespace bqlab {
namespace {

using json = nlohmann::json;

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("csv: number formatting failed");
  return std::string(buf, end);
}

json number(double x) {
  if (std::isfinite(x)) return x;
  return cell(x);
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string render_csv(const SeriesTable& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("csv: row width differs from header in " + t.name);
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + cell(row[i]);
    s += '\n';
  }
  return s;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const RunResult& res,
                                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& t : res.tables) {
    const auto p = out_dir / (t.name + ".csv");
    write_atomic(p, render_csv(t));
    files.push_back(p);
  }

  json verdicts = json::array();
  for (const auto& v : res.verdicts)
    verdicts.push_back({{"check", v.check}, {"pass", v.pass}, {"value", number(v.value)}, {"detail", v.detail}});
  json hyp = json::array();
  for (const auto& v : res.hypotheses) hyp.push_back({{"clause", v.clause}, {"detail", v.detail}});

  const auto vpath = out_dir / "verdict.json";
  write_atomic(vpath, json{{"experiment", cfg.experiment}, {"pass", res.all_pass()}, {"hypothesis_violations", hyp},
                           {"verdicts", verdicts}}
                          .dump(2) +
                          "\n");
  files.push_back(vpath);

  json summary = json::object();
  for (const auto& [k, v] : res.summary) summary[k] = number(v);
  json artifacts = json::array();
  for (const auto& f : files) artifacts.push_back(f.filename().string());
  const auto mpath = out_dir / "manifest.json";
  artifacts.push_back(mpath.filename().string());
  const json manifest{{"config_hash", config_hash(cfg)},
                      {"code_version", BQLAB_VERSION},
                      {"written_at", utc_now()},
                      {"experiment", cfg.experiment},
                      {"kind", cfg.kind},
                      {"pass", res.all_pass()},
                      {"hypotheses", {{"theorem", to_string(cfg.theorem)}, {"violations", hyp}}},
                      {"verdicts", verdicts},
                      {"summary", summary},
                      {"artifacts", artifacts},
                      {"config", json::parse(canonical_json(cfg))}};
  write_atomic(mpath, manifest.dump(2) + "\n");
  files.push_back(mpath);
  return files;
}

}  // namespace bqlab
