#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "losstopo/cli/commands.hpp"
#include "losstopo/nn/serialize.hpp"

namespace losstopo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::optional<json> maybe_json(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  return nn::read_json_file(p);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(const json& v, const char* spec = "{:.4g}") {
  if (v.is_number()) return fmt::format(fmt::runtime(spec), v.get<double>());
  return "n/a";
}

void runs_section(std::string& md, const fs::path& out) {
  md += "## Runs\n\n";
  if (!fs::exists(out / "manifest.json")) {
    md += "No artifacts.\n\n";
    return;
  }
  const auto m = load_manifest(out);
  md += fmt::format("Architecture `{}`, {} runs.\n\n", m.arch.id(), m.runs.size());
  md += "| run | status | final loss | train acc (%) | test acc (%) |\n|---|---|---|---|---|\n";
  for (const auto& r : m.runs)
    md += fmt::format("| {} | {} | {:.4g} | {:.2f} | {:.2f} |\n", r.id, r.diverged ? "diverged" : "ok", r.final_loss,
                      100.0 * r.train_accuracy, 100.0 * r.test_accuracy);
  md += "\n";
}

void homotopy_section(std::string& md, const fs::path& out) {
  md += "## Homotopy classes\n\n";
  const auto part = maybe_json(out / "homotopy/partition.json");
  const auto stats = maybe_json(out / "homotopy/stats.json");
  if (!part || !stats) {
    md += "No artifacts.\n\n";
    return;
  }
  md += fmt::format("{} classes (threshold: {}).\n\n", (*part)["class_count"].get<std::size_t>(),
                    (*stats)["threshold"].dump());
  md += "| class | size | members | mean test acc (%) | std |\n|---|---|---|---|---|\n";
  const auto& classes = (*part)["classes"];
  const auto& summaries = (*stats)["classes"];
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::string members;
    for (const auto& id : classes[c]) members += (members.empty() ? "" : " ") + id.get<std::string>();
    const auto& s = summaries.at(c);
    md += fmt::format("| {} | {} | {} | {} | {} |\n", c, classes[c].size(), members, num(s["mean"], "{:.2f}"),
                      num(s["stddev"], "{:.2f}"));
  }
  md += fmt::format("\nWithin-class max spread {} points, between-class mean gap {} points.\n\n",
                    num((*stats)["within_class_max_spread"], "{:.2f}"),
                    num((*stats)["between_class_mean_gap"], "{:.2f}"));
  md += "![relation](homotopy/relation.svg)\n\n";
}

void persistence_section(std::string& md, const fs::path& out) {
  md += "## Persistence and generalization gap\n\n";
  const auto summary = maybe_json(out / "persistence/summary.json");
  if (!summary) {
    md += "No artifacts.\n\n";
    return;
  }
  md += fmt::format("Mode {}, radius {}, {} samples.\n\n", (*summary)["mode"].get<std::string>(),
                    num((*summary)["radius"]), (*summary)["samples"].get<std::size_t>());
  md += "| run | total persistence | gap (%) | predicted gap (%) |\n|---|---|---|---|\n";
  for (const auto& r : (*summary)["runs"])
    md += fmt::format("| {} | {} | {} | {} |\n", r["id"].get<std::string>(), num(r["total_persistence"]),
                      num(r["gap_percent"], "{:.2f}"), num(r["predicted_gap_default_model"]));
  md += "\nPredictions use the default model (alpha 0.034, beta 0.12).\n\n";
  if (const auto fit = maybe_json(out / "persistence/gap_fit.json")) {
    if (fit->contains("alpha")) {
      md += fmt::format("Fitted: gap = {} - {} x persistence, R^2 = {} (n = {}).\n\n", num((*fit)["beta"]),
                        num((*fit)["alpha"]), num((*fit)["r_squared"], "{:.3f}"), (*fit)["n"].get<std::size_t>());
      md += "![gap](persistence/gap.svg)\n\n";
    } else {
      md += fmt::format("No fit: {}.\n\n", (*fit)["error"].get<std::string>());
    }
  }
}

void transfer_section(std::string& md, const fs::path& out) {
  md += "## Transfer\n\n";
  const auto csv_path = out / "transfer/comparison.csv";
  const auto fac = maybe_json(out / "transfer/factorization.json");
  if (!fs::exists(csv_path) || !fac) {
    md += "No artifacts.\n\n";
    return;
  }
  md += "| method | test acc (%) | parameters updated |\n|---|---|---|\n";
  std::istringstream in(read_text(csv_path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    md += fmt::format("| {} | {:.2f} | {} |\n", line.substr(0, a), 100.0 * std::stod(line.substr(a + 1, b - a - 1)),
                      line.substr(b + 1));
  }
  md += fmt::format("\nScratch saw {} examples, pullback {}. Factorization quality {}.\n\n",
                    (*fac)["scratch_examples"].get<std::size_t>(), (*fac)["pullback_examples"].get<std::size_t>(),
                    num((*fac)["quality"], "{:.4f}"));
}

}  // namespace

int cmd_report(const fs::path& out) {
  if (!fs::is_directory(out)) throw ConfigError("output directory " + out.string() + " does not exist");
  std::string md;
  std::string name = "experiment";
  if (const auto cfg = maybe_json(out / "config.json"); cfg && cfg->contains("name"))
    name = (*cfg)["name"].get<std::string>();
  md += "# Report: " + name + "\n\n";
  runs_section(md, out);
  homotopy_section(md, out);
  persistence_section(md, out);
  transfer_section(md, out);
  ArtifactWriter(out).text("report.md", md);
  spdlog::info("wrote {}", (out / "report.md").string());
  return kExitOk;
}

}  // namespace losstopo::cli
