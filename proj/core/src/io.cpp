#include "vertiplan/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

namespace vertiplan {

namespace {

constexpr double kEarthRadius = 6371008.8;
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

// Comma split with double-quoted fields ("" escapes a quote).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Header lookup: column name -> position.
std::vector<int> locate_columns(const std::vector<std::string>& header, const std::vector<std::string>& wanted,
                                const std::string& what) {
  std::vector<int> pos(wanted.size(), -1);
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == wanted[w]) pos[w] = static_cast<int>(h);
    }
    if (pos[w] < 0) throw FormatError(what + ": missing column '" + wanted[w] + "'");
  }
  return pos;
}

int two_digits(const std::string& s, std::size_t at) {
  if (at + 2 > s.size() || !std::isdigit(static_cast<unsigned char>(s[at])) ||
      !std::isdigit(static_cast<unsigned char>(s[at + 1]))) {
    throw FormatError("malformed timestamp '" + s + "'");
  }
  return (s[at] - '0') * 10 + (s[at + 1] - '0');
}

}  // namespace

PlanarPoint GeoReference::project(double lon, double lat) const noexcept {
  return {kEarthRadius * (lon - lon0) * kDegToRad * std::cos(lat0 * kDegToRad),
          kEarthRadius * (lat - lat0) * kDegToRad};
}

void GeoReference::unproject(PlanarPoint p, double& lon, double& lat) const noexcept {
  lat = lat0 + p.y / kEarthRadius / kDegToRad;
  lon = lon0 + p.x / (kEarthRadius * std::cos(lat0 * kDegToRad)) / kDegToRad;
}

double parse_rfc3339(const std::string& text) {
  const std::string s = trim(text);
  // YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    throw FormatError("malformed timestamp '" + text + "'");
  }
  const auto year = parse_int(s.substr(0, 4));
  if (!year) throw FormatError("malformed timestamp '" + text + "'");
  const int month = two_digits(s, 5), day = two_digits(s, 8);
  const int hour = two_digits(s, 11), minute = two_digits(s, 14), second = two_digits(s, 17);
  std::size_t at = 19;
  double fraction = 0.0;
  if (at < s.size() && s[at] == '.') {
    std::size_t end = at + 1;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    if (end == at + 1) throw FormatError("malformed timestamp '" + text + "'");
    fraction = *parse_double("0" + s.substr(at, end - at));
    at = end;
  }
  int offset_seconds = 0;
  if (at < s.size() && (s[at] == 'Z' || s[at] == 'z')) {
    ++at;
  } else if (at < s.size() && (s[at] == '+' || s[at] == '-')) {
    if (at + 6 != s.size() || s[at + 3] != ':') throw FormatError("malformed timestamp '" + text + "'");
    const int sign = s[at] == '+' ? 1 : -1;
    offset_seconds = sign * (two_digits(s, at + 1) * 3600 + two_digits(s, at + 4) * 60);
    at += 6;
  } else {
    throw FormatError("timestamp '" + text + "' lacks a UTC offset");
  }
  if (at != s.size()) throw FormatError("malformed timestamp '" + text + "'");

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(*year)}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) {
    throw FormatError("timestamp '" + text + "' is out of range");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second + fraction -
         offset_seconds;
}

OdLoadResult parse_od_csv(std::istream& in, const GridSpec& spec, const GeoReference& geo) {
  spec.validate();
  OdLoadResult out;
  out.demand = DemandTensor::zeros(spec);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("OD CSV: missing header row");
  const auto cols = locate_columns(split_csv(line), {"timestamp", "lon", "lat", "kind"}, "OD CSV");

  enum class TimeFormat { unknown, epoch, rfc3339 } format = TimeFormat::unknown;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const auto where = "OD CSV line " + std::to_string(line_no);
    for (int c : cols) {
      if (c >= static_cast<int>(fields.size())) throw FormatError(where + ": too few fields");
    }
    const auto& ts_text = fields[static_cast<std::size_t>(cols[0])];
    if (format == TimeFormat::unknown) format = parse_double(ts_text) ? TimeFormat::epoch : TimeFormat::rfc3339;

    OdRecord rec;
    if (format == TimeFormat::epoch) {
      const auto ts = parse_double(ts_text);
      if (!ts) throw FormatError(where + ": expected an epoch timestamp, got '" + ts_text + "'");
      rec.timestamp = *ts;
    } else {
      try {
        rec.timestamp = parse_rfc3339(ts_text);
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      }
    }
    const auto lon = parse_double(fields[static_cast<std::size_t>(cols[1])]);
    const auto lat = parse_double(fields[static_cast<std::size_t>(cols[2])]);
    if (!lon || !lat) throw FormatError(where + ": malformed coordinate");
    if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      throw FormatError(where + ": coordinate out of range");
    }
    rec.lon = *lon;
    rec.lat = *lat;
    const auto& kind = fields[static_cast<std::size_t>(cols[3])];
    if (kind == "origin") {
      rec.kind = EndpointKind::origin;
    } else if (kind == "destination") {
      rec.kind = EndpointKind::destination;
    } else {
      throw FormatError(where + ": kind must be 'origin' or 'destination', got '" + kind + "'");
    }
    out.records.push_back(rec);

    const auto point = geo.project(rec.lon, rec.lat);
    const auto cell = spec.cell_of(point);
    if (!cell) {
      ++out.skipped_outside_extent;
      continue;
    }
    const auto bin = spec.bin_of(rec.timestamp);
    if (!bin) {
      ++out.skipped_outside_window;
      continue;
    }
    out.demand.add(*bin, *cell);
    out.points.push_back(point);
  }
  if (out.skipped_outside_extent > 0) {
    out.warnings.push_back(std::to_string(out.skipped_outside_extent) + " record(s) outside the grid extent skipped");
  }
  if (out.skipped_outside_window > 0) {
    out.warnings.push_back(std::to_string(out.skipped_outside_window) + " record(s) outside the time window skipped");
  }
  return out;
}

OdLoadResult load_od_csv(const std::filesystem::path& path, const GridSpec& spec, const GeoReference& geo) {
  auto in = open_input(path);
  return parse_od_csv(in, spec, geo);
}

RealMatrix parse_raster_csv(std::istream& in, int rows, int cols) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (row >= rows) throw FormatError("raster has more than " + std::to_string(rows) + " rows");
    if (static_cast<int>(fields.size()) != cols) {
      throw FormatError("raster row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                        " values, expected " + std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      const auto v = parse_double(fields[static_cast<std::size_t>(c)]);
      if (!v) {
        throw FormatError("raster value at row " + std::to_string(row) + " col " + std::to_string(c) +
                          " is not a number: '" + fields[static_cast<std::size_t>(c)] + "'");
      }
      values.push_back(*v);
    }
    ++row;
  }
  if (row != rows) {
    throw FormatError("raster has " + std::to_string(row) + " rows, expected " + std::to_string(rows));
  }
  return RealMatrix(rows, cols, std::move(values));
}

RealMatrix load_raster_csv(const std::filesystem::path& path, const GridSpec& spec) {
  auto in = open_input(path);
  try {
    return parse_raster_csv(in, spec.rows, spec.cols);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

StationLoadResult parse_stations_csv(std::istream& in, const GridSpec& spec, const GeoReference& geo) {
  StationLoadResult out;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("stations CSV: missing header row");
  const auto cols = locate_columns(split_csv(line), {"name", "lon", "lat"}, "stations CSV");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const auto where = "stations CSV line " + std::to_string(line_no);
    for (int c : cols) {
      if (c >= static_cast<int>(fields.size())) throw FormatError(where + ": too few fields");
    }
    const auto lon = parse_double(fields[static_cast<std::size_t>(cols[1])]);
    const auto lat = parse_double(fields[static_cast<std::size_t>(cols[2])]);
    if (!lon || !lat) throw FormatError(where + ": malformed coordinate");
    const auto pos = geo.project(*lon, *lat);
    const auto cell = spec.cell_of(pos);
    if (!cell) {
      ++out.skipped_outside_extent;
      continue;
    }
    out.stations.push_back({fields[static_cast<std::size_t>(cols[0])], pos, *cell});
  }
  if (out.skipped_outside_extent > 0) {
    out.warnings.push_back(std::to_string(out.skipped_outside_extent) + " station(s) outside the grid extent skipped");
  }
  return out;
}

StationLoadResult load_stations_csv(const std::filesystem::path& path, const GridSpec& spec, const GeoReference& geo) {
  auto in = open_input(path);
  return parse_stations_csv(in, spec, geo);
}

std::vector<Cell> station_cells(const std::vector<Station>& stations) {
  std::vector<Cell> out;
  out.reserve(stations.size());
  for (const auto& s : stations) out.push_back(s.cell);
  return out;
}

std::string matrix_to_csv(const RealMatrix& matrix) {
  std::string out;
  char buf[32];
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      if (j) out += ',';
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, matrix(i, j));
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& matrix) {
  write_text_file(path, matrix_to_csv(matrix));
}

// ---------------------------------------------------------------------------
// JSON documents

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

nlohmann::json count_rows(const CountMatrix& m) {
  auto rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

CountMatrix count_rows_from(const nlohmann::json& j, int rows, int cols, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw FormatError(what + " must have " + std::to_string(rows) + " rows");
  }
  CountMatrix m(rows, cols, 0);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw FormatError(what + " row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number_integer()) {
        throw FormatError(what + " entry (" + std::to_string(i) + "," + std::to_string(c) + ") is not an integer");
      }
      m(i, c) = v.get<std::int64_t>();
    }
  }
  return m;
}

nlohmann::json cell_json(Cell c) { return nlohmann::json::array({c.row, c.col}); }
Cell cell_from(const nlohmann::json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

nlohmann::json grid_to_json(const GridSpec& spec) {
  return {{"rows", spec.rows},
          {"cols", spec.cols},
          {"cell_size", spec.cell_size},
          {"origin", {spec.origin.x, spec.origin.y}},
          {"time_bins", spec.time_bins},
          {"bin_duration", spec.bin_duration},
          {"time_origin", spec.time_origin}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec spec;
  spec.rows = j.at("rows").get<int>();
  spec.cols = j.at("cols").get<int>();
  spec.cell_size = get_or(j, "cell_size", spec.cell_size);
  if (j.contains("origin")) spec.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  spec.time_bins = get_or(j, "time_bins", spec.time_bins);
  spec.bin_duration = get_or(j, "bin_duration", spec.bin_duration);
  spec.time_origin = get_or(j, "time_origin", spec.time_origin);
  spec.validate();
  return spec;
}

nlohmann::json policy_to_json(const CapacityPolicy& policy) {
  return {{"per_site_capacity", policy.per_site_capacity},
          {"site_budget", policy.site_budget},
          {"service_radius", policy.service_radius}};
}

CapacityPolicy policy_from_json(const nlohmann::json& j) {
  CapacityPolicy policy;
  policy.per_site_capacity = get_or(j, "per_site_capacity", policy.per_site_capacity);
  policy.site_budget = get_or(j, "site_budget", policy.site_budget);
  policy.service_radius = get_or(j, "service_radius", policy.service_radius);
  policy.validate();
  return policy;
}

ValidationReport PlanDocument::validate(bool enforce_total) const {
  if (layout.counts.rows() != grid.rows || layout.counts.cols() != grid.cols) {
    ValidationReport report;
    report.violations.push_back({ConstraintKind::non_negativity, std::nullopt, "layout shape does not match grid"});
    return report;
  }
  return validate_supply(supply(), policy, enforce_total);
}

nlohmann::json plan_to_json(const PlanDocument& doc) {
  nlohmann::json j;
  j["schema_version"] = kPlanSchemaVersion;
  j["kind"] = "vertiplan.plan";
  j["grid"] = grid_to_json(doc.grid);
  j["capacity"] = policy_to_json(doc.policy);
  j["supply"] = count_rows(doc.supply().values);
  j["sites"] = doc.layout.total_sites();
  if (doc.geo) j["geo_reference"] = {{"lon0", doc.geo->lon0}, {"lat0", doc.geo->lat0}};
  if (doc.loss_history) {
    auto curve = nlohmann::json::array();
    for (const auto& p : *doc.loss_history) curve.push_back({p.iteration, p.loss});
    j["loss_history"] = std::move(curve);
  }
  nlohmann::json prov{{"source", doc.provenance.source}};
  if (doc.provenance.seed) prov["seed"] = *doc.provenance.seed;
  if (doc.provenance.created_at) prov["created_at"] = *doc.provenance.created_at;
  j["provenance"] = std::move(prov);
  return j;
}

PlanDocument plan_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema_version")) throw FormatError("plan document lacks schema_version");
  const auto version = j.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kPlanSchemaVersion) {
    throw VersionError("unsupported plan schema_version " + version.dump());
  }
  try {
    PlanDocument doc;
    doc.grid = grid_from_json(j.at("grid"));
    doc.policy = policy_from_json(j.at("capacity"));
    SupplyMatrix supply{count_rows_from(j.at("supply"), doc.grid.rows, doc.grid.cols, "supply")};
    const auto report = validate_supply(supply, doc.policy, false);
    if (!report.ok()) throw ValidationError("plan supply is infeasible: " + report.summary());
    doc.layout = layout_from_supply(supply, doc.policy);
    if (j.contains("geo_reference")) {
      doc.geo = GeoReference{j.at("geo_reference").at("lon0").get<double>(),
                             j.at("geo_reference").at("lat0").get<double>()};
    }
    if (j.contains("loss_history")) {
      std::vector<LossPoint> curve;
      for (const auto& p : j.at("loss_history")) curve.push_back({p.at(0).get<int>(), p.at(1).get<std::int64_t>()});
      doc.loss_history = std::move(curve);
    }
    if (j.contains("provenance")) {
      const auto& prov = j.at("provenance");
      doc.provenance.source = get_or<std::string>(prov, "source", "");
      if (prov.contains("seed")) doc.provenance.seed = prov.at("seed").get<std::uint64_t>();
      if (prov.contains("created_at")) doc.provenance.created_at = prov.at("created_at").get<std::string>();
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed plan document: ") + e.what());
  } catch (const InputError& e) {
    throw ValidationError(std::string("invalid plan document: ") + e.what());
  }
}

void save_plan(const PlanDocument& doc, const std::filesystem::path& path) {
  write_text_file(path, plan_to_json(doc).dump(2) + "\n");
}

PlanDocument load_plan(const std::filesystem::path& path) { return plan_from_json(read_json_file(path)); }

nlohmann::json plan_to_geojson(const PlanDocument& doc) {
  auto features = nlohmann::json::array();
  for (int i = 0; i < doc.grid.rows; ++i) {
    for (int j = 0; j < doc.grid.cols; ++j) {
      const auto sites = doc.layout.counts(i, j);
      if (sites <= 0) continue;
      const auto center = doc.grid.cell_center({i, j});
      double x = center.x, y = center.y;
      if (doc.geo) doc.geo->unproject(center, x, y);
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Point"}, {"coordinates", {x, y}}}},
                          {"properties",
                           {{"row", i}, {"col", j}, {"sites", sites}, {"capacity", sites * doc.policy.per_site_capacity}}}});
    }
  }
  nlohmann::json out{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  if (!doc.geo) out["properties"] = {{"coordinates", "planar-meters"}};
  return out;
}

nlohmann::json demand_archive_to_json(const DemandArchive& archive) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "vertiplan.demand";
  j["grid"] = grid_to_json(archive.grid);
  j["total"] = archive.demand.total();
  j["values"] = archive.demand.values().data();
  auto pts = nlohmann::json::array();
  for (const auto& p : archive.points) pts.push_back({p.x, p.y});
  j["points"] = std::move(pts);
  return j;
}

DemandArchive demand_archive_from_json(const nlohmann::json& j) {
  if (!j.is_object() || get_or<int>(j, "schema_version", -1) != 1) {
    throw VersionError("unsupported demand archive schema_version");
  }
  try {
    DemandArchive a;
    a.grid = grid_from_json(j.at("grid"));
    auto values = j.at("values").get<std::vector<std::int64_t>>();
    a.demand = DemandTensor(CountTensor(a.grid.time_bins, a.grid.rows, a.grid.cols, std::move(values)));
    for (const auto& p : j.at("points")) a.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed demand archive: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("malformed demand archive: ") + e.what());
  }
}

void save_demand_archive(const DemandArchive& archive, const std::filesystem::path& path) {
  write_text_file(path, demand_archive_to_json(archive).dump() + "\n");
}

DemandArchive load_demand_archive(const std::filesystem::path& path) {
  return demand_archive_from_json(read_json_file(path));
}

nlohmann::json interaction_to_json(const InteractionRecord& record) {
  auto recommended = nlohmann::json::array();
  for (const auto& c : record.recommended) recommended.push_back(cell_json(c));
  auto features = nlohmann::json::array();
  for (const auto& f : record.features) features.push_back(f);
  return {{"iteration", record.iteration},
          {"recommended", std::move(recommended)},
          {"chosen", cell_json(record.chosen)},
          {"features", std::move(features)},
          {"weights_after", record.weights_after.values}};
}

InteractionRecord interaction_from_json(const nlohmann::json& j) {
  try {
    InteractionRecord r;
    r.iteration = j.at("iteration").get<int>();
    for (const auto& c : j.at("recommended")) r.recommended.push_back(cell_from(c));
    r.chosen = cell_from(j.at("chosen"));
    for (const auto& f : j.at("features")) r.features.push_back(f.get<FeatureVector>());
    r.weights_after.values = j.at("weights_after").get<std::array<double, 4>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed interaction record: ") + e.what());
  }
}

InteractionLogWriter::InteractionLogWriter(std::filesystem::path path) : path_(std::move(path)) {
  open_output(path_, std::ios::app);
}

void InteractionLogWriter::append(const InteractionRecord& record) {
  auto out = open_output(path_, std::ios::app);
  out << interaction_to_json(record).dump() << '\n';
  if (!out) throw IoError("failed to append to '" + path_.string() + "'");
}

std::vector<InteractionRecord> read_interaction_log(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<InteractionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(interaction_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed interaction log line: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::filesystem::path resolve(const nlohmann::json& j, const char* key, const std::filesystem::path& base) {
  const auto raw = get_or<std::string>(j, key, "");
  if (raw.empty()) return {};
  std::filesystem::path p(raw);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    AppConfig cfg;
    cfg.grid = grid_from_json(j.at("grid"));
    if (j.contains("geo_reference")) {
      cfg.geo = {j.at("geo_reference").at("lon0").get<double>(), j.at("geo_reference").at("lat0").get<double>()};
    }
    cfg.policy = policy_from_json(j.value("capacity", nlohmann::json::object()));

    const auto opt = j.value("optimizer", nlohmann::json::object());
    cfg.optimizer = OptimizerConfig::defaults_for(cfg.grid, cfg.policy);
    cfg.optimizer.iterations = get_or(opt, "iterations", cfg.optimizer.iterations);
    cfg.optimizer.kernel_radius = get_or(opt, "kernel_radius", cfg.optimizer.kernel_radius);
    cfg.optimizer.tabu_tenure = get_or(opt, "tabu_tenure", cfg.optimizer.tabu_tenure);
    cfg.optimizer.mode = optimizer_mode_from_string(get_or<std::string>(opt, "mode", "relocate"));
    cfg.optimizer.validate();

    const auto sc = j.value("scoring", nlohmann::json::object());
    cfg.scoring.travel_speed = get_or(sc, "travel_speed", cfg.scoring.travel_speed);
    cfg.scoring.kernel_radius = get_or(sc, "kernel_radius", default_kernel_radius(cfg.grid, cfg.policy));

    const auto rec = j.value("recommender", nlohmann::json::object());
    if (rec.contains("weights")) cfg.recommender.initial_weights.values = rec.at("weights").get<std::array<double, 4>>();
    cfg.recommender.learning_rate = get_or(rec, "learning_rate", cfg.recommender.learning_rate);
    cfg.recommender.top_k = get_or(rec, "top_k", cfg.recommender.top_k);
    cfg.recommender.min_separation = get_or(rec, "min_separation", cfg.policy.service_radius);
    cfg.recommender.validate();

    const auto init = j.value("init", nlohmann::json::object());
    cfg.init.algorithm = cluster_algorithm_from_string(get_or<std::string>(init, "algorithm", "kmeans"));
    cfg.init.target_sites = get_or(init, "k", static_cast<int>(cfg.policy.site_budget));
    cfg.init.over_cluster = get_or(init, "over_cluster", 0);
    cfg.init.seed = get_or<std::uint64_t>(init, "seed", 0);
    cfg.init.validate();

    const auto ds = j.value("dataset", nlohmann::json::object());
    cfg.dataset.name = get_or<std::string>(ds, "name", "default");
    cfg.dataset.od_csv = resolve(ds, "od_csv", base_dir);
    cfg.dataset.demand_archive = resolve(ds, "demand_archive", base_dir);
    cfg.dataset.obstacle_csv = resolve(ds, "obstacle_csv", base_dir);
    cfg.dataset.population_csv = resolve(ds, "population_csv", base_dir);
    cfg.dataset.rent_csv = resolve(ds, "rent_csv", base_dir);
    cfg.dataset.stations_csv = resolve(ds, "stations_csv", base_dir);
    cfg.dataset.existing_plan = resolve(ds, "existing_plan", base_dir);
    cfg.dataset.distilled_plan = resolve(ds, "distilled_plan", base_dir);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed configuration: ") + e.what());
  }
}

nlohmann::json config_to_json(const AppConfig& cfg) {
  auto path = [](const std::filesystem::path& p) { return p.string(); };
  return {{"grid", grid_to_json(cfg.grid)},
          {"geo_reference", {{"lon0", cfg.geo.lon0}, {"lat0", cfg.geo.lat0}}},
          {"capacity", policy_to_json(cfg.policy)},
          {"optimizer",
           {{"iterations", cfg.optimizer.iterations},
            {"kernel_radius", cfg.optimizer.kernel_radius},
            {"tabu_tenure", cfg.optimizer.tabu_tenure},
            {"mode", to_string(cfg.optimizer.mode)}}},
          {"scoring", {{"travel_speed", cfg.scoring.travel_speed}, {"kernel_radius", cfg.scoring.kernel_radius}}},
          {"recommender",
           {{"weights", cfg.recommender.initial_weights.values},
            {"learning_rate", cfg.recommender.learning_rate},
            {"top_k", cfg.recommender.top_k},
            {"min_separation", cfg.recommender.min_separation}}},
          {"init",
           {{"algorithm", to_string(cfg.init.algorithm)},
            {"k", cfg.init.target_sites},
            {"over_cluster", cfg.init.over_cluster},
            {"seed", cfg.init.seed}}},
          {"dataset",
           {{"name", cfg.dataset.name},
            {"od_csv", path(cfg.dataset.od_csv)},
            {"demand_archive", path(cfg.dataset.demand_archive)},
            {"obstacle_csv", path(cfg.dataset.obstacle_csv)},
            {"population_csv", path(cfg.dataset.population_csv)},
            {"rent_csv", path(cfg.dataset.rent_csv)},
            {"stations_csv", path(cfg.dataset.stations_csv)},
            {"existing_plan", path(cfg.dataset.existing_plan)},
            {"distilled_plan", path(cfg.dataset.distilled_plan)}}}};
}

AppConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed to write '" + path.string() + "'");
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vertiplan
