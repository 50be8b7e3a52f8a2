#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace boxctl::cli {

using json = nlohmann::ordered_json;

inline constexpr int kManifestSchemaVersion = 1;

const char* library_version();

/// Run record printed after every successful command.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv);

  json config = json::object();
  json results = json::object();

  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void add_file(const std::filesystem::path& path, std::size_t rows, const std::vector<std::string>& columns);
  json finish(int threads) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> warnings_;
  json files_ = json::array();
  std::chrono::steady_clock::time_point start_;
};

/// CSV with a header row and 17 significant digits per floating value.
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::vector<std::string> columns);

  template <class... Cells>
  void row(const Cells&... cells) {
    std::ostringstream line;
    line.precision(17);
    bool first = true;
    ((line << (first ? "" : ",") << cells, first = false), ...);
    out_ << line.str() << '\n';
    ++rows_;
  }

  void row(const std::vector<double>& cells);

  /// Flushes and records the file in the manifest.
  void close(Manifest& manifest);

 private:
  std::filesystem::path path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

}  // namespace boxctl::cli
