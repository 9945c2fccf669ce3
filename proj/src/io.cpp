#include "bzwalk/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "bzwalk/error.hpp"

#ifndef BZWALK_VERSION
#define BZWALK_VERSION "unknown"
#endif

namespace bzwalk {

std::filesystem::path resolve_output_directory(const std::string& flag_value) {
  std::filesystem::path dir = ".";
  if (!flag_value.empty()) {
    dir = flag_value;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    dir = env;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

CsvWriter& CsvWriter::comment(const std::string& line) {
  out_ << "# " << line << '\n';
  return *this;
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
  return *this;
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  if (columns_ && values.size() != columns_) throw Error("CSV row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
  if (!out_) throw Error("write failed: " + path_.string());
  return *this;
}

CsvWriter& CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  if (columns_ && values.size() + 1 != columns_) throw Error("CSV row width does not match header");
  out_ << label;
  for (double v : values) out_ << ',' << format_number(v);
  out_ << '\n';
  if (!out_) throw Error("write failed: " + path_.string());
  return *this;
}

std::string code_version() { return BZWALK_VERSION; }

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"config", config},   {"seed", seed},
          {"version", version}, {"outputs", outputs}, {"wall_seconds", wall_seconds}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.value("seed", std::uint64_t{0});
  m.version = j.value("version", std::string{});
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.wall_seconds = j.value("wall_seconds", 0.0);
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace bzwalk
