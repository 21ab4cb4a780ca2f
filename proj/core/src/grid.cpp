#include "vertiplan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vertiplan {

std::string to_string(Cell cell) {
  return "(" + std::to_string(cell.row) + "," + std::to_string(cell.col) + ")";
}

void GridSpec::validate() const {
  if (rows < 1 || cols < 1) throw InputError("grid must have at least one row and one column");
  if (time_bins < 1) throw InputError("grid must have at least one time bin");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw InputError("cell_size must be positive");
  if (!(bin_duration > 0.0) || !std::isfinite(bin_duration)) {
    throw InputError("bin_duration must be positive");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(time_origin)) {
    throw InputError("grid origin must be finite");
  }
}

std::optional<Cell> GridSpec::cell_of(PlanarPoint p) const noexcept {
  const double fx = std::floor((p.x - origin.x) / cell_size);
  const double fy = std::floor((p.y - origin.y) / cell_size);
  if (!(fx >= 0.0 && fx < cols && fy >= 0.0 && fy < rows)) return std::nullopt;
  return Cell{static_cast<int>(fy), static_cast<int>(fx)};
}

Cell GridSpec::clamped_cell_of(PlanarPoint p) const noexcept {
  double fx = std::floor((p.x - origin.x) / cell_size);
  double fy = std::floor((p.y - origin.y) / cell_size);
  if (!std::isfinite(fx)) fx = 0.0;
  if (!std::isfinite(fy)) fy = 0.0;
  fx = std::clamp(fx, 0.0, static_cast<double>(cols - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(rows - 1));
  return Cell{static_cast<int>(fy), static_cast<int>(fx)};
}

std::optional<int> GridSpec::bin_of(double timestamp) const noexcept {
  const double f = std::floor((timestamp - time_origin) / bin_duration);
  if (!(f >= 0.0 && f < time_bins)) return std::nullopt;
  return static_cast<int>(f);
}

PlanarPoint GridSpec::cell_center(Cell cell) const noexcept {
  return PlanarPoint{origin.x + (cell.col + 0.5) * cell_size, origin.y + (cell.row + 0.5) * cell_size};
}

double GridSpec::center_distance(Cell a, Cell b) const noexcept {
  const double dr = a.row - b.row;
  const double dc = a.col - b.col;
  return cell_size * std::sqrt(dr * dr + dc * dc);
}

void CapacityPolicy::validate() const {
  if (per_site_capacity < 1) throw InputError("per_site_capacity must be at least 1");
  if (site_budget < 1) throw InputError("site_budget must be at least 1");
  if (!(service_radius >= 0.0) || !std::isfinite(service_radius)) {
    throw InputError("service_radius must be non-negative");
  }
}

DemandTensor::DemandTensor(CountTensor values) : values_(std::move(values)) {
  for (auto v : values_.flat()) {
    if (v < 0) throw InputError("demand entries must be non-negative");
  }
}

DemandTensor DemandTensor::from_slice(const CountMatrix& slice) {
  CountTensor t(1, slice.rows(), slice.cols(), 0);
  t.set_slice(0, slice);
  return DemandTensor(std::move(t));
}

void DemandTensor::add(int t, Cell cell, std::int64_t units) {
  if (t < 0 || t >= time_bins() || cell.row < 0 || cell.row >= rows() || cell.col < 0 ||
      cell.col >= cols()) {
    throw InputError("demand index out of range");
  }
  auto& v = values_(t, cell.row, cell.col);
  if (v + units < 0) throw InputError("demand entries must be non-negative");
  v += units;
}

SupplyMatrix supply_from_layout(const VertiportLayout& layout, const CapacityPolicy& policy) {
  SupplyMatrix s{CountMatrix(layout.counts.rows(), layout.counts.cols(), 0)};
  for (std::size_t k = 0; k < layout.counts.size(); ++k) {
    s.values[k] = layout.counts[k] * policy.per_site_capacity;
  }
  return s;
}

VertiportLayout layout_from_supply(const SupplyMatrix& supply, const CapacityPolicy& policy) {
  const auto report = validate_supply(supply, policy, false);
  if (!report.ok()) throw ValidationError(report.summary());
  VertiportLayout layout{CountMatrix(supply.rows(), supply.cols(), 0)};
  for (std::size_t k = 0; k < supply.values.size(); ++k) {
    layout.counts[k] = supply.values[k] / policy.per_site_capacity;
  }
  return layout;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::total_supply: return "total_supply";
    case ConstraintKind::granularity: return "granularity";
    case ConstraintKind::non_negativity: return "non_negativity";
  }
  return "unknown";
}

bool ValidationReport::has(ConstraintKind kind) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "feasible";
  std::ostringstream out;
  for (std::size_t k = 0; k < violations.size(); ++k) {
    if (k) out << "; ";
    out << violations[k].message;
  }
  return out.str();
}

ValidationReport validate_supply(const SupplyMatrix& supply, const CapacityPolicy& policy,
                                 bool enforce_total) {
  ValidationReport report;
  const auto p = policy.per_site_capacity;
  for (int i = 0; i < supply.rows(); ++i) {
    for (int j = 0; j < supply.cols(); ++j) {
      const auto v = supply(i, j);
      const Cell cell{i, j};
      if (v < 0) {
        report.violations.push_back({ConstraintKind::non_negativity, cell,
                                     "negative supply " + std::to_string(v) + " at " + to_string(cell)});
      }
      if (p > 0 && v % p != 0) {
        report.violations.push_back({ConstraintKind::granularity, cell,
                                     "supply " + std::to_string(v) + " at " + to_string(cell) +
                                         " is not a multiple of " + std::to_string(p)});
      }
    }
  }
  if (enforce_total) {
    const auto total = supply.total();
    const auto expected = p * policy.site_budget;
    if (total != expected) {
      report.violations.push_back({ConstraintKind::total_supply, std::nullopt,
                                   "total supply " + std::to_string(total) + " != " +
                                       std::to_string(expected) + " (p*c)"});
    }
  }
  return report;
}

namespace {

std::vector<Offset> stencil(double cell_size, double radius, int max_drow, int max_dcol) {
  if (!(cell_size > 0.0)) throw InputError("cell_size must be positive");
  if (!(radius >= 0.0)) throw InputError("radius must be non-negative");
  const double reach = radius / cell_size;
  const double span = std::floor(reach + 1e-9);
  const int row_span = static_cast<int>(std::min(span, static_cast<double>(max_drow)));
  const int col_span = static_cast<int>(std::min(span, static_cast<double>(max_dcol)));
  // Compare squared lengths in cell units; the slack absorbs rounding in radius/cell_size.
  const double limit = reach * reach * (1.0 + 1e-12);
  std::vector<Offset> out;
  for (int dr = -row_span; dr <= row_span; ++dr) {
    for (int dc = -col_span; dc <= col_span; ++dc) {
      const std::int64_t d2 = static_cast<std::int64_t>(dr) * dr + static_cast<std::int64_t>(dc) * dc;
      if (static_cast<double>(d2) <= limit) out.push_back({dr, dc, d2});
    }
  }
  std::sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) {
    if (a.squared_length != b.squared_length) return a.squared_length < b.squared_length;
    if (a.drow != b.drow) return a.drow < b.drow;
    return a.dcol < b.dcol;
  });
  return out;
}

}  // namespace

std::vector<Offset> neighborhood_stencil(double cell_size, double radius) {
  constexpr int kUnbounded = 1 << 20;
  return stencil(cell_size, radius, kUnbounded, kUnbounded);
}

std::vector<Offset> neighborhood_stencil(const GridSpec& spec, double radius) {
  return stencil(spec.cell_size, radius, std::max(spec.rows - 1, 0), std::max(spec.cols - 1, 0));
}

std::vector<Cell> neighborhood(const GridSpec& spec, Cell cell, double radius) {
  if (!spec.contains(cell)) throw InputError("cell " + to_string(cell) + " is outside the grid");
  std::vector<Cell> out;
  for (const auto& off : neighborhood_stencil(spec, radius)) {
    const Cell c{cell.row + off.drow, cell.col + off.dcol};
    if (spec.contains(c)) out.push_back(c);
  }
  return out;
}

}  // namespace vertiplan
