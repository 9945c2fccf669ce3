#pragma once

// Output plumbing: CSV files with unit comments, run manifests and the
// output-directory lookup.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace bzwalk {

inline constexpr const char* kOutputDirEnv = "BZWALK_OUTPUT_DIR";

/// Flag value if non-empty, else $BZWALK_OUTPUT_DIR, else the current directory.
/// The directory is created if missing.
std::filesystem::path resolve_output_directory(const std::string& flag_value);

/// Numbers are written with 17 significant digits so files round-trip and are
/// byte-identical for identical inputs.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  CsvWriter& comment(const std::string& line);
  CsvWriter& header(const std::vector<std::string>& columns);
  CsvWriter& row(const std::vector<double>& values);
  /// Leading text cell followed by numbers.
  CsvWriter& row(const std::string& label, const std::vector<double>& values);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

std::string format_number(double v);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
};

std::string code_version();

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace bzwalk
