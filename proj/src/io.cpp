#include "soliton/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace soliton {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty())
    throw std::invalid_argument("csv: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

CsvTable &CsvTable::row(const std::vector<double> &values) {
  if (values.size() != columns_)
    throw std::invalid_argument("csv: row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) text_ += (i ? "," : "") + format_number(values[i]);
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string CsvTable::str() const { return text_; }

void write_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path output_directory(const std::string &dir) {
  if (const char *root = std::getenv("SOLITON_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
  return dir;
}

nlohmann::ordered_json to_json(const FitResult &f) {
  nlohmann::ordered_json j;
  j["model"] = f.model;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i) params[f.names[i]] = {{"value", num(f.params[i])}, {"ci95", num(f.ci[i])}};
  j["parameters"] = params;
  j["window"] = {num(f.t0), num(f.t1)};
  j["rms"] = num(f.rms);
  j["samples"] = f.samples;
  j["ok"] = f.ok;
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

} // namespace soliton
