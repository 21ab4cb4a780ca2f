#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vertiplan/grid.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/optimizer.hpp"
#include "vertiplan/recommender.hpp"

namespace vertiplan {

// Local equirectangular projection about (lon0, lat0), which maps to planar (0, 0).
struct GeoReference {
  double lon0 = 0.0;
  double lat0 = 0.0;

  PlanarPoint project(double lon, double lat) const noexcept;
  void unproject(PlanarPoint p, double& lon, double& lat) const noexcept;

  friend bool operator==(const GeoReference&, const GeoReference&) = default;
};

enum class EndpointKind { origin, destination };

struct OdRecord {
  double timestamp = 0.0;  // epoch seconds
  double lon = 0.0;
  double lat = 0.0;
  EndpointKind kind = EndpointKind::origin;
};

struct OdLoadResult {
  std::vector<OdRecord> records;     // every parsed row
  std::vector<PlanarPoint> points;   // projected positions of the gridded rows
  DemandTensor demand;
  std::size_t skipped_outside_extent = 0;
  std::size_t skipped_outside_window = 0;
  std::vector<std::string> warnings;
};

// Parses an RFC-3339 timestamp ("2024-11-01T08:30:00Z", "...+08:00", optional
// fractional seconds) to epoch seconds. Throws FormatError.
double parse_rfc3339(const std::string& text);

// Each row is one demand unit at its (bin, cell). Rows outside the grid or
// the time window are counted and skipped. Timestamp format (integer epoch or
// RFC-3339) is detected from the first data row and applied to the whole file.
OdLoadResult load_od_csv(const std::filesystem::path& path, const GridSpec& spec, const GeoReference& geo);
OdLoadResult parse_od_csv(std::istream& in, const GridSpec& spec, const GeoReference& geo);

// Dense M×N numeric grid, row 0 first. Throws FormatError on shape or parse problems.
RealMatrix load_raster_csv(const std::filesystem::path& path, const GridSpec& spec);
RealMatrix parse_raster_csv(std::istream& in, int rows, int cols);

struct Station {
  std::string name;
  PlanarPoint position;
  Cell cell;
};

struct StationLoadResult {
  std::vector<Station> stations;
  std::size_t skipped_outside_extent = 0;
  std::vector<std::string> warnings;
};

// `name,lon,lat` with header.
StationLoadResult load_stations_csv(const std::filesystem::path& path, const GridSpec& spec, const GeoReference& geo);
StationLoadResult parse_stations_csv(std::istream& in, const GridSpec& spec, const GeoReference& geo);

std::vector<Cell> station_cells(const std::vector<Station>& stations);

// Writes a matrix as dense CSV with round-trip precision.
void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& matrix);
std::string matrix_to_csv(const RealMatrix& matrix);

struct Provenance {
  std::string source;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> created_at;  // omitted in deterministic mode

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline constexpr int kPlanSchemaVersion = 1;

struct PlanDocument {
  GridSpec grid;
  CapacityPolicy policy;
  VertiportLayout layout;
  std::optional<GeoReference> geo;
  std::optional<std::vector<LossPoint>> loss_history;
  Provenance provenance;

  SupplyMatrix supply() const { return supply_from_layout(layout, policy); }
  // Shape, granularity and non-negativity checks; Σ S = p·c only when enforce_total.
  ValidationReport validate(bool enforce_total) const;

  friend bool operator==(const PlanDocument&, const PlanDocument&) = default;
};

nlohmann::json plan_to_json(const PlanDocument& doc);
// Throws VersionError for an unknown schema_version, ValidationError when the
// stored supply violates granularity or non-negativity, FormatError otherwise.
PlanDocument plan_from_json(const nlohmann::json& j);

void save_plan(const PlanDocument& doc, const std::filesystem::path& path);
PlanDocument load_plan(const std::filesystem::path& path);

// One Point feature per occupied cell at the cell center; lon/lat when the
// document carries a GeoReference, planar meters otherwise.
nlohmann::json plan_to_geojson(const PlanDocument& doc);

nlohmann::json grid_to_json(const GridSpec& spec);
GridSpec grid_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const CapacityPolicy& policy);
CapacityPolicy policy_from_json(const nlohmann::json& j);

// Demand archive: tensor plus the projected points that produced it.
struct DemandArchive {
  GridSpec grid;
  DemandTensor demand;
  std::vector<PlanarPoint> points;

  friend bool operator==(const DemandArchive&, const DemandArchive&) = default;
};

nlohmann::json demand_archive_to_json(const DemandArchive& archive);
DemandArchive demand_archive_from_json(const nlohmann::json& j);
void save_demand_archive(const DemandArchive& archive, const std::filesystem::path& path);
DemandArchive load_demand_archive(const std::filesystem::path& path);

nlohmann::json interaction_to_json(const InteractionRecord& record);
InteractionRecord interaction_from_json(const nlohmann::json& j);

// Append-only JSON-lines sink; one InteractionRecord per line.
class InteractionLogWriter {
 public:
  explicit InteractionLogWriter(std::filesystem::path path);
  void append(const InteractionRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::vector<InteractionRecord> read_interaction_log(const std::filesystem::path& path);

// Paths of the input files a dataset bundle is assembled from.
struct DatasetPaths {
  std::string name = "default";
  std::filesystem::path od_csv;
  std::filesystem::path demand_archive;
  std::filesystem::path obstacle_csv;
  std::filesystem::path population_csv;
  std::filesystem::path rent_csv;
  std::filesystem::path stations_csv;
  std::filesystem::path existing_plan;   // optional starting sites for sessions
  std::filesystem::path distilled_plan;  // optimized plan used as T=1 demand
};

struct AppConfig {
  GridSpec grid;
  GeoReference geo;
  CapacityPolicy policy;
  OptimizerConfig optimizer;
  ScoringParams scoring;
  RecommenderConfig recommender;
  InitStrategy init;
  DatasetPaths dataset;
};

// Missing sections take defaults; kernel radii and min_separation default
// from the service radius. Relative dataset paths resolve against base_dir.
AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const AppConfig& config);
AppConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// ISO-8601 UTC timestamp of the current wall clock.
std::string utc_now_iso8601();

}  // namespace vertiplan
