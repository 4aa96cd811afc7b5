#include "losstopo/persistence/diagram.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <tuple>

#include "losstopo/error.hpp"

namespace losstopo::persistence {

std::string_view to_string(FiltrationKind k) { return k == FiltrationKind::kRips ? "rips" : "sublevel"; }

void PersistenceDiagram::canonicalize() {
  std::sort(points.begin(), points.end(), [](const PersistencePoint& a, const PersistencePoint& b) {
    return std::tie(a.dimension, a.birth, a.death, a.truncated) < std::tie(b.dimension, b.birth, b.death, b.truncated);
  });
}

std::vector<PersistencePoint> PersistenceDiagram::in_dimension(int dim) const {
  std::vector<PersistencePoint> out;
  for (const auto& p : points)
    if (p.dimension == dim) out.push_back(p);
  return out;
}

std::size_t PersistenceDiagram::essential_count() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.essential(); }));
}

double total_persistence(const PersistenceDiagram& dgm) {
  double total = 0.0;
  for (const auto& p : dgm.points)
    if (p.death < kInfinity) total += p.death - p.birth;
  return total;
}

namespace {

std::string format_double(double v) {
  if (v == kInfinity) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInfinity;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("bad number '" + s + "' in diagram CSV");
  return v;
}

}  // namespace

std::string to_csv(const PersistenceDiagram& dgm) {
  std::string out = "dimension,birth,death\n";
  for (const auto& p : dgm.points) {
    out += std::to_string(p.dimension);
    out += ',';
    out += format_double(p.birth);
    out += ',';
    out += format_double(p.death);
    out += '\n';
  }
  return out;
}

PersistenceDiagram diagram_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "dimension,birth,death") throw FormatError("missing diagram CSV header");
  PersistenceDiagram dgm;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string dim, birth, death;
    if (!std::getline(row, dim, ',') || !std::getline(row, birth, ',') || !std::getline(row, death))
      throw FormatError("malformed diagram row '" + line + "'");
    PersistencePoint p;
    p.dimension = static_cast<int>(parse_double(dim));
    p.birth = parse_double(birth);
    p.death = parse_double(death);
    dgm.points.push_back(p);
  }
  return dgm;
}

}  // namespace losstopo::persistence
