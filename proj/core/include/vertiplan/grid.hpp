#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vertiplan/matrix.hpp"

namespace vertiplan {

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

std::string to_string(Cell cell);

// Projected (metric) coordinate.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

// Discretized spatiotemporal grid. Cells are half-open squares:
// cell (i, j) covers x in [origin.x + j*size, origin.x + (j+1)*size) and
// y in [origin.y + i*size, origin.y + (i+1)*size). Row 0 is the southern edge.
struct GridSpec {
  int rows = 1;
  int cols = 1;
  double cell_size = 200.0;
  PlanarPoint origin{};
  int time_bins = 1;
  double bin_duration = 3600.0;
  double time_origin = 0.0;  // epoch seconds at the start of bin 0

  // Throws InputError on any invariant violation.
  void validate() const;

  bool contains(Cell cell) const noexcept {
    return cell.row >= 0 && cell.row < rows && cell.col >= 0 && cell.col < cols;
  }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t flat_index(Cell cell) const noexcept {
    return static_cast<std::size_t>(cell.row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(cell.col);
  }
  Cell cell_at(std::size_t flat) const noexcept {
    return Cell{static_cast<int>(flat / static_cast<std::size_t>(cols)),
                static_cast<int>(flat % static_cast<std::size_t>(cols))};
  }

  // Cell containing the point, or nullopt outside the extent.
  std::optional<Cell> cell_of(PlanarPoint p) const noexcept;
  // Nearest in-bounds cell (clamps out-of-extent points to the border).
  Cell clamped_cell_of(PlanarPoint p) const noexcept;
  // Time bin containing the timestamp, or nullopt outside [time_origin, time_origin + T*duration).
  std::optional<int> bin_of(double timestamp) const noexcept;

  PlanarPoint cell_center(Cell cell) const noexcept;
  double center_distance(Cell a, Cell b) const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct CapacityPolicy {
  std::int64_t per_site_capacity = 20;  // p
  std::int64_t site_budget = 1;         // c
  double service_radius = 1000.0;       // r, meters

  void validate() const;

  friend bool operator==(const CapacityPolicy&, const CapacityPolicy&) = default;
};

// D: demand counts per (time bin, row, col). Entries are non-negative.
class DemandTensor {
 public:
  DemandTensor() = default;
  explicit DemandTensor(CountTensor values);
  DemandTensor(int time_bins, int rows, int cols) : values_(time_bins, rows, cols, 0) {}

  static DemandTensor zeros(const GridSpec& spec) {
    return DemandTensor(spec.time_bins, spec.rows, spec.cols);
  }
  // Single-bin tensor from an M×N matrix.
  static DemandTensor from_slice(const CountMatrix& slice);

  const CountTensor& values() const noexcept { return values_; }
  int time_bins() const noexcept { return values_.depth(); }
  int rows() const noexcept { return values_.rows(); }
  int cols() const noexcept { return values_.cols(); }
  std::int64_t at(int t, int r, int c) const noexcept { return values_(t, r, c); }
  std::int64_t total() const { return values_.sum(); }

  void add(int t, Cell cell, std::int64_t units = 1);

  bool matches(const GridSpec& spec) const noexcept {
    return time_bins() == spec.time_bins && rows() == spec.rows && cols() == spec.cols;
  }

  friend bool operator==(const DemandTensor&, const DemandTensor&) = default;

 private:
  CountTensor values_;
};

// V: vertiport count per cell.
struct VertiportLayout {
  CountMatrix counts;

  static VertiportLayout empty(const GridSpec& spec) { return {CountMatrix(spec.rows, spec.cols, 0)}; }
  std::int64_t total_sites() const { return counts.sum(); }

  friend bool operator==(const VertiportLayout&, const VertiportLayout&) = default;
};

// S: service capacity per cell per time bin. May hold infeasible values;
// feasibility is checked by validate_supply.
struct SupplyMatrix {
  CountMatrix values;

  static SupplyMatrix zeros(const GridSpec& spec) { return {CountMatrix(spec.rows, spec.cols, 0)}; }
  int rows() const noexcept { return values.rows(); }
  int cols() const noexcept { return values.cols(); }
  std::int64_t operator()(int r, int c) const noexcept { return values(r, c); }
  std::int64_t total() const { return values.sum(); }

  friend bool operator==(const SupplyMatrix&, const SupplyMatrix&) = default;
};

SupplyMatrix supply_from_layout(const VertiportLayout& layout, const CapacityPolicy& policy);

// Inverse of supply_from_layout; throws ValidationError unless S satisfies granularity and
// non-negativity.
VertiportLayout layout_from_supply(const SupplyMatrix& supply, const CapacityPolicy& policy);

enum class ConstraintKind { total_supply, granularity, non_negativity };

std::string to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  std::optional<Cell> cell;  // absent for the total-supply constraint
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ConstraintKind kind) const noexcept;
  std::string summary() const;
};

// Checks granularity (S mod p == 0) and non-negativity on every cell, and the
// total-supply equality Σ S = p·c when enforce_total is set.
ValidationReport validate_supply(const SupplyMatrix& supply, const CapacityPolicy& policy,
                                 bool enforce_total);

// Cell offset relative to a center cell, with its squared length in cell units.
struct Offset {
  int drow = 0;
  int dcol = 0;
  std::int64_t squared_length = 0;
};

// All offsets within `radius` meters for a grid of the given cell size, ordered
// by (distance, row-major position). Reused across cells since the ordering only
// depends on the offset.
std::vector<Offset> neighborhood_stencil(double cell_size, double radius);
// Same, minus offsets that cannot land inside a grid of this size.
std::vector<Offset> neighborhood_stencil(const GridSpec& spec, double radius);

// In-bounds cells whose center lies within `radius` of `cell`'s center,
// sorted by (distance, row-major index). Includes `cell` itself.
std::vector<Cell> neighborhood(const GridSpec& spec, Cell cell, double radius);

}  // namespace vertiplan
