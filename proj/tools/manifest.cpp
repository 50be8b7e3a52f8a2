#include "manifest.hpp"

#include "boxctl/error.hpp"

#ifndef BOXCTL_VERSION
#define BOXCTL_VERSION "0.0.0"
#endif

namespace boxctl::cli {

const char* library_version() { return BOXCTL_VERSION; }

Manifest::Manifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

void Manifest::add_file(const std::filesystem::path& path, std::size_t rows, const std::vector<std::string>& columns) {
  files_.push_back({{"path", path.string()}, {"format", "csv"}, {"rows", rows}, {"columns", columns}});
}

json Manifest::finish(int threads) const {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["tool"] = "boxctl";
  m["version"] = library_version();
  m["command"] = command_;
  m["argv"] = argv_;
  m["config"] = config;
  m["threads"] = threads;
  m["wall_time_s"] = wall;
  m["results"] = results;
  m["warnings"] = warnings_;
  m["files"] = files_;
  return m;
}

CsvWriter::CsvWriter(std::filesystem::path path, std::vector<std::string> columns)
    : path_(std::move(path)), columns_(std::move(columns)), out_(path_) {
  if (!out_) throw UsageError("cannot open '" + path_.string() + "' for writing");
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& cells) {
  std::ostringstream line;
  line.precision(17);
  for (std::size_t i = 0; i < cells.size(); ++i) line << (i ? "," : "") << cells[i];
  out_ << line.str() << '\n';
  ++rows_;
}

void CsvWriter::close(Manifest& manifest) {
  out_.flush();
  if (!out_) throw UsageError("write to '" + path_.string() + "' failed");
  out_.close();
  manifest.add_file(path_, rows_, columns_);
}

}  // namespace boxctl::cli
