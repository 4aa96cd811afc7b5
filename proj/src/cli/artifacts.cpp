#include <charconv>
#include <fstream>
#include <sstream>

#include "losstopo/cli/commands.hpp"
#include "losstopo/error.hpp"
#include "losstopo/nn/serialize.hpp"

namespace losstopo::cli {

using nlohmann::json;

ArtifactWriter::ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void ArtifactWriter::text(const std::filesystem::path& rel, const std::string& content) {
  std::lock_guard lock(mutex_);
  const auto full = root_ / rel;
  std::filesystem::create_directories(full.parent_path());
  std::ofstream f(full, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + full.string());
  f << content;
  if (!f) throw Error("write failed for " + full.string());
  written_.push_back(rel.generic_string());
}

void ArtifactWriter::json(const std::filesystem::path& rel, const nlohmann::json& j) { text(rel, j.dump(2) + "\n"); }

std::vector<std::string> ArtifactWriter::written() const {
  std::lock_guard lock(mutex_);
  return written_;
}

std::vector<const RunRecord*> Manifest::completed() const {
  std::vector<const RunRecord*> out;
  for (const auto& r : runs)
    if (!r.diverged) out.push_back(&r);
  return out;
}

json to_json(const Manifest& m) {
  json runs = json::array();
  for (const auto& r : m.runs)
    runs.push_back({{"id", r.id},
                    {"file", r.file},
                    {"config", nn::to_json(r.config)},
                    {"status", r.diverged ? "diverged" : "ok"},
                    {"final_loss", r.final_loss},
                    {"train_accuracy", r.train_accuracy},
                    {"test_accuracy", r.test_accuracy}});
  return {{"name", m.name}, {"arch", nn::to_json(m.arch)}, {"dataset", nn::to_json(m.dataset)}, {"runs", runs}};
}

Manifest manifest_from_json(const json& j) {
  nn::reject_unknown_keys(j, {"name", "arch", "dataset", "runs"}, "manifest");
  Manifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.arch = nn::arch_from_json(j.at("arch"));
    m.dataset = nn::dataset_from_json(j.at("dataset"));
    for (const auto& r : j.at("runs")) {
      nn::reject_unknown_keys(r, {"id", "file", "config", "status", "final_loss", "train_accuracy", "test_accuracy"},
                              "manifest run");
      RunRecord rec;
      rec.id = r.at("id").get<std::string>();
      rec.file = r.at("file").get<std::string>();
      rec.config = nn::train_config_from_json(r.at("config"));
      rec.diverged = r.at("status").get<std::string>() == "diverged";
      rec.final_loss = r.at("final_loss").get<double>();
      rec.train_accuracy = r.at("train_accuracy").get<double>();
      rec.test_accuracy = r.at("test_accuracy").get<double>();
      m.runs.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& out_dir) {
  const auto path = out_dir / "manifest.json";
  if (!std::filesystem::exists(path)) throw ConfigError("no manifest at " + path.string() + " (run 'train' first)");
  return manifest_from_json(nn::read_json_file(path));
}

Eigen::MatrixXd read_points_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open points file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      const std::string trimmed = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
      if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw FormatError("non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError("ragged rows in points file " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("points file " + path.string() + " has no rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace losstopo::cli
