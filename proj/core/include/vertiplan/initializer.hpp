#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vertiplan/grid.hpp"

namespace vertiplan {

enum class ClusterAlgorithm { kmeans, gmm, hac };

std::string to_string(ClusterAlgorithm algorithm);
ClusterAlgorithm cluster_algorithm_from_string(const std::string& name);

struct ClusterResult {
  std::vector<PlanarPoint> centers;
  std::vector<int> membership;  // point index -> cluster index, or kUnassigned after pruning
  std::vector<std::size_t> sizes;

  static constexpr int kUnassigned = -1;
};

struct ClusterOptions {
  int kmeans_max_rounds = 300;
  int gmm_max_rounds = 100;
  // HAC runs on a seeded uniform subsample above this size; remaining points
  // join their nearest resulting center.
  std::size_t hac_max_points = 20000;
};

// Clusters planar points into exactly k groups.
//   kmeans: Lloyd's algorithm with k-means++ seeding.
//   gmm:    EM on diagonal-covariance Gaussians, means seeded by k-means++;
//           membership is the most responsible component, center its mean.
//   hac:    agglomerative clustering with Ward linkage; center is the centroid.
// Throws InputError when points.size() < k or k < 1.
ClusterResult cluster(std::span<const PlanarPoint> points, int k, ClusterAlgorithm algorithm,
                      std::uint64_t seed, const ClusterOptions& options = {});

// Keeps the `keep` largest clusters (ties to the lower index), renumbered in
// their original order. Points of dropped clusters become unassigned.
ClusterResult prune_smallest(const ClusterResult& result, std::size_t keep);

struct LayoutFromCenters {
  VertiportLayout layout;
  std::size_t clamped = 0;  // centers outside the extent moved to the border
  std::vector<std::string> warnings;
};

// One site per center in the cell containing it.
LayoutFromCenters layout_from_centers(std::span<const PlanarPoint> centers, const GridSpec& spec);

struct InitStrategy {
  ClusterAlgorithm algorithm = ClusterAlgorithm::kmeans;
  int target_sites = 400;
  int over_cluster = 0;  // extra clusters formed and then pruned away
  std::uint64_t seed = 0;

  void validate() const;
};

struct Initialization {
  ClusterResult clusters;  // after pruning
  LayoutFromCenters layout;
};

// cluster(target + over) -> prune_smallest(target) -> layout.
Initialization initialize_layout(std::span<const PlanarPoint> points, const InitStrategy& strategy,
                                 const GridSpec& spec, const ClusterOptions& options = {});

}  // namespace vertiplan
