#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace losstopo::persistence {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct PersistencePoint {
  int dimension = 0;
  double birth = 0.0;
  double death = kInfinity;  // kInfinity marks an essential class
  // Death clipped at the filtration's upper bound rather than observed.
  bool truncated = false;

  bool essential() const { return death == kInfinity; }
  double persistence() const { return death - birth; }
  bool operator==(const PersistencePoint&) const = default;
};

enum class FiltrationKind { kRips, kSublevel };

std::string_view to_string(FiltrationKind k);

// Multiset of features. canonicalize() sorts by (dimension, birth, death).
struct PersistenceDiagram {
  std::vector<PersistencePoint> points;
  FiltrationKind kind = FiltrationKind::kRips;
  double max_edge = kInfinity;   // rips
  std::size_t k_neighbors = 0;   // sublevel
  bool h2_requested = false;     // rips: dimension 2 was asked for and skipped

  void canonicalize();
  std::vector<PersistencePoint> in_dimension(int dim) const;
  std::size_t essential_count() const;
};

// Sum of death - birth over points with finite death.
double total_persistence(const PersistenceDiagram& dgm);

// "dimension,birth,death" header, one row per point, "inf" for essential
// classes; values printed with 17 significant digits.
std::string to_csv(const PersistenceDiagram& dgm);
PersistenceDiagram diagram_from_csv(std::string_view csv);

}  // namespace losstopo::persistence
