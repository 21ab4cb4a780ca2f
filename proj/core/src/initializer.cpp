#include "vertiplan/initializer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vertiplan/random.hpp"

namespace vertiplan {

std::string to_string(ClusterAlgorithm algorithm) {
  switch (algorithm) {
    case ClusterAlgorithm::kmeans: return "kmeans";
    case ClusterAlgorithm::gmm: return "gmm";
    case ClusterAlgorithm::hac: return "hac";
  }
  return "unknown";
}

ClusterAlgorithm cluster_algorithm_from_string(const std::string& name) {
  if (name == "kmeans") return ClusterAlgorithm::kmeans;
  if (name == "gmm") return ClusterAlgorithm::gmm;
  if (name == "hac") return ClusterAlgorithm::hac;
  throw InputError("unknown clustering algorithm '" + name + "'");
}

namespace {

double squared_distance(PlanarPoint a, PlanarPoint b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::size_t nearest_center(PlanarPoint p, const std::vector<PlanarPoint>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<PlanarPoint> kmeanspp_seed(std::span<const PlanarPoint> points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<PlanarPoint> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(points[rng.index(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding left target past the running sum
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = rng.index(n);
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

ClusterResult finish(std::vector<PlanarPoint> centers, std::vector<int> membership) {
  ClusterResult out;
  out.sizes.assign(centers.size(), 0);
  for (int m : membership) ++out.sizes[static_cast<std::size_t>(m)];
  out.centers = std::move(centers);
  out.membership = std::move(membership);
  return out;
}

ClusterResult run_kmeans(std::span<const PlanarPoint> points, int k, std::uint64_t seed, int max_rounds) {
  Rng rng(seed);
  auto centers = kmeanspp_seed(points, k, rng);
  const std::size_t n = points.size();
  std::vector<int> membership(n, -1);
  std::vector<double> sx(centers.size()), sy(centers.size());
  std::vector<std::size_t> count(centers.size());
  for (int round = 0; round < max_rounds; ++round) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(nearest_center(points[i], centers));
      if (c != membership[i]) {
        membership[i] = c;
        moved = true;
      }
    }
    if (!moved) break;
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sy.begin(), sy.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(membership[i]);
      sx[c] += points[i].x;
      sy[c] += points[i].y;
      ++count[c];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (count[c] > 0) centers[c] = {sx[c] / static_cast<double>(count[c]), sy[c] / static_cast<double>(count[c])};
    }
  }
  return finish(std::move(centers), std::move(membership));
}

struct Component {
  double weight = 0.0;
  PlanarPoint mean;
  double var_x = 1.0;
  double var_y = 1.0;
};

double log_density(const Component& c, PlanarPoint p) {
  constexpr double kLog2Pi = 1.8378770664093453;
  const double dx = p.x - c.mean.x;
  const double dy = p.y - c.mean.y;
  return std::log(std::max(c.weight, 1e-300)) - kLog2Pi - 0.5 * (std::log(c.var_x) + std::log(c.var_y)) -
         0.5 * (dx * dx / c.var_x + dy * dy / c.var_y);
}

ClusterResult run_gmm(std::span<const PlanarPoint> points, int k, std::uint64_t seed, int max_rounds) {
  Rng rng(seed);
  const std::size_t n = points.size();
  const auto kk = static_cast<std::size_t>(k);
  const auto seeds = kmeanspp_seed(points, k, rng);

  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double gvx = 0.0, gvy = 0.0;
  for (const auto& p : points) {
    gvx += (p.x - mx) * (p.x - mx);
    gvy += (p.y - my) * (p.y - my);
  }
  gvx /= static_cast<double>(n);
  gvy /= static_cast<double>(n);
  const double floor = std::max(1e-6 * std::max(gvx, gvy), 1e-6);

  // Initial variances and weights from the hard assignment to the seeds.
  std::vector<Component> comps(kk);
  {
    std::vector<double> cnt(kk, 0.0), sxx(kk, 0.0), syy(kk, 0.0);
    for (const auto& p : points) {
      const auto c = nearest_center(p, seeds);
      cnt[c] += 1.0;
      sxx[c] += (p.x - seeds[c].x) * (p.x - seeds[c].x);
      syy[c] += (p.y - seeds[c].y) * (p.y - seeds[c].y);
    }
    for (std::size_t c = 0; c < kk; ++c) {
      comps[c].mean = seeds[c];
      comps[c].weight = std::max(cnt[c], 1.0) / static_cast<double>(n);
      comps[c].var_x = cnt[c] > 0 ? std::max(sxx[c] / cnt[c], floor) : std::max(gvx, floor);
      comps[c].var_y = cnt[c] > 0 ? std::max(syy[c] / cnt[c], floor) : std::max(gvy, floor);
    }
  }

  std::vector<double> logp(kk);
  std::vector<double> nk(kk), sx(kk), sy(kk), sxx(kk), syy(kk);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int round = 0; round < max_rounds; ++round) {
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sy.begin(), sy.end(), 0.0);
    std::fill(sxx.begin(), sxx.end(), 0.0);
    std::fill(syy.begin(), syy.end(), 0.0);
    double ll = 0.0;
    for (const auto& p : points) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        logp[c] = log_density(comps[c], p);
        peak = std::max(peak, logp[c]);
      }
      double norm = 0.0;
      for (std::size_t c = 0; c < kk; ++c) norm += std::exp(logp[c] - peak);
      const double log_norm = peak + std::log(norm);
      ll += log_norm;
      for (std::size_t c = 0; c < kk; ++c) {
        const double r = std::exp(logp[c] - log_norm);
        if (r == 0.0) continue;
        nk[c] += r;
        sx[c] += r * p.x;
        sy[c] += r * p.y;
        sxx[c] += r * p.x * p.x;
        syy[c] += r * p.y * p.y;
      }
    }
    for (std::size_t c = 0; c < kk; ++c) {
      comps[c].weight = nk[c] / static_cast<double>(n);
      if (nk[c] < 1e-10) continue;  // starved component keeps its shape
      const PlanarPoint mean{sx[c] / nk[c], sy[c] / nk[c]};
      comps[c].mean = mean;
      comps[c].var_x = std::max(sxx[c] / nk[c] - mean.x * mean.x, floor);
      comps[c].var_y = std::max(syy[c] / nk[c] - mean.y * mean.y, floor);
    }
    if (std::abs(ll - prev_ll) <= 1e-10 * std::abs(ll)) break;
    prev_ll = ll;
  }

  std::vector<PlanarPoint> centers(kk);
  for (std::size_t c = 0; c < kk; ++c) centers[c] = comps[c].mean;
  std::vector<int> membership(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kk; ++c) {
      const double lp = log_density(comps[c], points[i]);
      if (lp > best_lp) {
        best_lp = lp;
        best = c;
      }
    }
    membership[i] = static_cast<int>(best);
  }
  return finish(std::move(centers), std::move(membership));
}

struct Merge {
  std::size_t a;
  std::size_t b;
  double height;
};

// Ward linkage via the nearest-neighbor chain; O(n) memory, O(n²) time.
// Returns the n-1 merges (by original cluster slot) in discovery order.
std::vector<Merge> ward_merges(std::span<const PlanarPoint> points) {
  const std::size_t n = points.size();
  std::vector<PlanarPoint> centroid(points.begin(), points.end());
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::size_t> where(n);
  std::iota(where.begin(), where.end(), 0);

  auto ward = [&](std::size_t a, std::size_t b) {
    return size[a] * size[b] / (size[a] + size[b]) * squared_distance(centroid[a], centroid[b]);
  };
  auto deactivate = [&](std::size_t slot) {
    const std::size_t pos = where[slot];
    const std::size_t last = active.back();
    active[pos] = last;
    where[last] = pos;
    active.pop_back();
  };

  std::vector<Merge> merges;
  merges.reserve(n > 0 ? n - 1 : 0);
  std::vector<std::size_t> chain;
  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(*std::min_element(active.begin(), active.end()));
    const std::size_t a = chain.back();
    const bool has_prev = chain.size() >= 2;
    const std::size_t prev = has_prev ? chain[chain.size() - 2] : 0;
    std::size_t best = has_prev ? prev : n;
    double best_d = has_prev ? ward(a, prev) : std::numeric_limits<double>::infinity();
    for (std::size_t b : active) {
      if (b == a) continue;
      const double d = ward(a, b);
      // Strictly closer only; ties keep the chain predecessor, else the lower slot.
      if (d < best_d || (d == best_d && b < best && !(has_prev && best == prev))) {
        best_d = d;
        best = b;
      }
    }
    if (has_prev && best == prev) {
      chain.pop_back();
      chain.pop_back();
      const std::size_t keep = std::min(a, prev);
      const std::size_t drop = std::max(a, prev);
      const double total = size[keep] + size[drop];
      centroid[keep] = {(centroid[keep].x * size[keep] + centroid[drop].x * size[drop]) / total,
                        (centroid[keep].y * size[keep] + centroid[drop].y * size[drop]) / total};
      size[keep] = total;
      deactivate(drop);
      merges.push_back({keep, drop, best_d});
    } else {
      chain.push_back(best);
    }
  }
  return merges;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

ClusterResult run_hac(std::span<const PlanarPoint> all_points, int k, std::uint64_t seed,
                      std::size_t max_points) {
  const std::size_t n_all = all_points.size();
  std::vector<std::size_t> sample(n_all);
  std::iota(sample.begin(), sample.end(), 0);
  if (n_all > max_points && max_points >= static_cast<std::size_t>(k)) {
    Rng rng(seed);
    // Partial Fisher-Yates; keep original order inside the sample.
    for (std::size_t i = 0; i < max_points; ++i) {
      const std::size_t j = i + rng.index(n_all - i);
      std::swap(sample[i], sample[j]);
    }
    sample.resize(max_points);
    std::sort(sample.begin(), sample.end());
  }
  std::vector<PlanarPoint> points;
  points.reserve(sample.size());
  for (auto idx : sample) points.push_back(all_points[idx]);
  const std::size_t n = points.size();

  // Ward is reducible, so sorting the chain's merges by height recovers the dendrogram.
  auto merges = ward_merges(points);
  std::stable_sort(merges.begin(), merges.end(),
                   [](const Merge& x, const Merge& y) { return x.height < y.height; });
  DisjointSets sets(n);
  const std::size_t to_apply = n - static_cast<std::size_t>(k);
  for (std::size_t m = 0; m < to_apply; ++m) sets.unite(merges[m].a, merges[m].b);

  // Number clusters by their lowest sampled point index.
  std::vector<int> label_of_root(n, -1);
  std::vector<int> sample_label(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = sets.find(i);
    if (label_of_root[root] < 0) label_of_root[root] = next++;
    sample_label[i] = label_of_root[root];
  }
  std::vector<double> sx(static_cast<std::size_t>(k), 0.0), sy(static_cast<std::size_t>(k), 0.0),
      cnt(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(sample_label[i]);
    sx[c] += points[i].x;
    sy[c] += points[i].y;
    cnt[c] += 1.0;
  }
  std::vector<PlanarPoint> centers(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < centers.size(); ++c) centers[c] = {sx[c] / cnt[c], sy[c] / cnt[c]};

  std::vector<int> membership(n_all, -1);
  for (std::size_t i = 0; i < n; ++i) membership[sample[i]] = sample_label[i];
  for (std::size_t i = 0; i < n_all; ++i) {
    if (membership[i] < 0) membership[i] = static_cast<int>(nearest_center(all_points[i], centers));
  }
  return finish(std::move(centers), std::move(membership));
}

}  // namespace

ClusterResult cluster(std::span<const PlanarPoint> points, int k, ClusterAlgorithm algorithm,
                      std::uint64_t seed, const ClusterOptions& options) {
  if (k < 1) throw InputError("k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw InputError("cannot form " + std::to_string(k) + " clusters from " + std::to_string(points.size()) +
                     " points");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError("point coordinates must be finite");
  }
  switch (algorithm) {
    case ClusterAlgorithm::kmeans: return run_kmeans(points, k, seed, options.kmeans_max_rounds);
    case ClusterAlgorithm::gmm: return run_gmm(points, k, seed, options.gmm_max_rounds);
    case ClusterAlgorithm::hac: return run_hac(points, k, seed, options.hac_max_points);
  }
  throw InputError("unknown clustering algorithm");
}

ClusterResult prune_smallest(const ClusterResult& result, std::size_t keep) {
  const std::size_t k = result.centers.size();
  if (keep > k) {
    throw InputError("cannot keep " + std::to_string(keep) + " of " + std::to_string(k) + " clusters");
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return result.sizes[a] > result.sizes[b]; });
  std::vector<bool> retained(k, false);
  for (std::size_t r = 0; r < keep; ++r) retained[order[r]] = true;

  std::vector<int> relabel(k, ClusterResult::kUnassigned);
  ClusterResult out;
  for (std::size_t c = 0; c < k; ++c) {
    if (!retained[c]) continue;
    relabel[c] = static_cast<int>(out.centers.size());
    out.centers.push_back(result.centers[c]);
    out.sizes.push_back(result.sizes[c]);
  }
  out.membership.reserve(result.membership.size());
  for (int m : result.membership) {
    out.membership.push_back(m < 0 ? ClusterResult::kUnassigned : relabel[static_cast<std::size_t>(m)]);
  }
  return out;
}

LayoutFromCenters layout_from_centers(std::span<const PlanarPoint> centers, const GridSpec& spec) {
  LayoutFromCenters out{VertiportLayout::empty(spec), 0, {}};
  for (const auto& c : centers) {
    auto cell = spec.cell_of(c);
    if (!cell) {
      cell = spec.clamped_cell_of(c);
      ++out.clamped;
    }
    out.layout.counts(cell->row, cell->col) += 1;
  }
  if (out.clamped > 0) {
    out.warnings.push_back(std::to_string(out.clamped) + " cluster center(s) outside the grid extent were "
                           "clamped to the border");
  }
  return out;
}

void InitStrategy::validate() const {
  if (target_sites < 1) throw InputError("target_sites must be at least 1");
  if (over_cluster < 0) throw InputError("over_cluster must be non-negative");
}

Initialization initialize_layout(std::span<const PlanarPoint> points, const InitStrategy& strategy,
                                 const GridSpec& spec, const ClusterOptions& options) {
  strategy.validate();
  auto clusters = cluster(points, strategy.target_sites + strategy.over_cluster, strategy.algorithm,
                          strategy.seed, options);
  if (strategy.over_cluster > 0) {
    clusters = prune_smallest(clusters, static_cast<std::size_t>(strategy.target_sites));
  }
  auto layout = layout_from_centers(clusters.centers, spec);
  return {std::move(clusters), std::move(layout)};
}

}  // namespace vertiplan
