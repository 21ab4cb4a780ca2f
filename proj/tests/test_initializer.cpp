#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vertiplan/error.hpp"
#include "vertiplan/initializer.hpp"
#include "vertiplan/random.hpp"

using namespace vertiplan;

namespace {

constexpr ClusterAlgorithm kAll[] = {ClusterAlgorithm::kmeans, ClusterAlgorithm::gmm, ClusterAlgorithm::hac};

double dist(PlanarPoint a, PlanarPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

PlanarPoint mean_of(const std::vector<PlanarPoint>& pts) {
  PlanarPoint m{};
  for (const auto& p : pts) {
    m.x += p.x;
    m.y += p.y;
  }
  m.x /= static_cast<double>(pts.size());
  m.y /= static_cast<double>(pts.size());
  return m;
}

std::vector<PlanarPoint> blob(Rng& rng, PlanarPoint center, double spread, int n) {
  std::vector<PlanarPoint> out;
  for (int i = 0; i < n; ++i) out.push_back({rng.normal(center.x, spread), rng.normal(center.y, spread)});
  return out;
}

void check_partition(const ClusterResult& r, std::size_t n, int k) {
  REQUIRE(r.centers.size() == static_cast<std::size_t>(k));
  REQUIRE(r.membership.size() == n);
  REQUIRE(r.sizes.size() == static_cast<std::size_t>(k));
  std::vector<std::size_t> counted(static_cast<std::size_t>(k), 0);
  for (int m : r.membership) {
    REQUIRE(m >= 0);
    REQUIRE(m < k);
    ++counted[static_cast<std::size_t>(m)];
  }
  CHECK(counted == r.sizes);
  CHECK(std::accumulate(r.sizes.begin(), r.sizes.end(), std::size_t{0}) == n);
}

ClusterResult sized(std::vector<std::size_t> sizes) {
  ClusterResult r;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    r.centers.push_back({static_cast<double>(c), 0.0});
    for (std::size_t i = 0; i < sizes[c]; ++i) r.membership.push_back(static_cast<int>(c));
  }
  r.sizes = std::move(sizes);
  return r;
}

}  // namespace

TEST_CASE("two well separated blobs are recovered by every algorithm") {
  Rng rng(41);
  auto a = blob(rng, {0.0, 0.0}, 100.0, 50);
  auto b = blob(rng, {10000.0, 10000.0}, 100.0, 50);
  const auto mean_a = mean_of(a);
  const auto mean_b = mean_of(b);
  std::vector<PlanarPoint> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());

  for (auto alg : kAll) {
    CAPTURE(to_string(alg));
    const auto r = cluster(pts, 2, alg, 5);
    check_partition(r, pts.size(), 2);
    const auto& near_a = dist(r.centers[0], mean_a) < dist(r.centers[1], mean_a) ? r.centers[0] : r.centers[1];
    const auto& near_b = &near_a == &r.centers[0] ? r.centers[1] : r.centers[0];
    CHECK(dist(near_a, mean_a) < 50.0);
    CHECK(dist(near_b, mean_b) < 50.0);
  }
}

TEST_CASE("one cluster per distinct point puts centers on the points") {
  const std::vector<PlanarPoint> pts{{0, 0}, {500, 0}, {0, 700}, {900, 900}, {-300, 40}};
  for (auto alg : kAll) {
    CAPTURE(to_string(alg));
    const auto r = cluster(pts, 5, alg, 3);
    check_partition(r, pts.size(), 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& c = r.centers[static_cast<std::size_t>(r.membership[i])];
      CHECK(dist(c, pts[i]) < 1e-6);
      CHECK(r.sizes[static_cast<std::size_t>(r.membership[i])] == 1);
    }
  }
}

TEST_CASE("a single cluster sits on the centroid") {
  Rng rng(42);
  const auto pts = blob(rng, {300.0, -200.0}, 800.0, 120);
  const auto centroid = mean_of(pts);
  for (auto alg : {ClusterAlgorithm::kmeans, ClusterAlgorithm::hac}) {
    const auto r = cluster(pts, 1, alg, 9);
    CHECK(dist(r.centers[0], centroid) < 1e-9);
  }
}

TEST_CASE("clustering input errors") {
  const std::vector<PlanarPoint> pts{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(cluster(pts, 3, ClusterAlgorithm::kmeans, 1), InputError);
  CHECK_THROWS_AS(cluster(pts, 0, ClusterAlgorithm::hac, 1), InputError);
  const std::vector<PlanarPoint> bad{{0, 0}, {NAN, 1}};
  CHECK_THROWS_AS(cluster(bad, 1, ClusterAlgorithm::gmm, 1), InputError);
  CHECK_THROWS_AS(cluster_algorithm_from_string("dbscan"), InputError);
}

TEST_CASE("seeded clustering is reproducible") {
  Rng rng(43);
  std::vector<PlanarPoint> pts;
  for (int b = 0; b < 6; ++b) {
    const auto part = blob(rng, {rng.uniform(0, 8000), rng.uniform(0, 8000)}, 300.0, 80);
    pts.insert(pts.end(), part.begin(), part.end());
  }
  for (auto alg : kAll) {
    const auto a = cluster(pts, 6, alg, 77);
    const auto b = cluster(pts, 6, alg, 77);
    CHECK(a.centers == b.centers);
    CHECK(a.membership == b.membership);
  }
  // HAC ignores the seed.
  CHECK(cluster(pts, 6, ClusterAlgorithm::hac, 1).centers == cluster(pts, 6, ClusterAlgorithm::hac, 2).centers);
}

TEST_CASE("k-means centers scale with the coordinates") {
  Rng rng(44);
  std::vector<PlanarPoint> pts;
  for (int b = 0; b < 5; ++b) {
    const auto part = blob(rng, {rng.uniform(0, 5000), rng.uniform(0, 5000)}, 400.0, 60);
    pts.insert(pts.end(), part.begin(), part.end());
  }
  const auto base = cluster(pts, 7, ClusterAlgorithm::kmeans, 12);
  for (double s : {2.0, 0.25, 3.0, 0.1}) {
    CAPTURE(s);
    auto scaled = pts;
    for (auto& p : scaled) p = {p.x * s, p.y * s};
    const auto r = cluster(scaled, 7, ClusterAlgorithm::kmeans, 12);
    CHECK(r.membership == base.membership);
    for (std::size_t c = 0; c < r.centers.size(); ++c) {
      CHECK(r.centers[c].x == doctest::Approx(base.centers[c].x * s).epsilon(1e-9));
      CHECK(r.centers[c].y == doctest::Approx(base.centers[c].y * s).epsilon(1e-9));
    }
  }
}

TEST_CASE("HAC on a subsample still assigns every point") {
  Rng rng(45);
  std::vector<PlanarPoint> pts;
  for (int b = 0; b < 4; ++b) {
    const auto part = blob(rng, {b * 5000.0, 0.0}, 200.0, 100);
    pts.insert(pts.end(), part.begin(), part.end());
  }
  ClusterOptions options;
  options.hac_max_points = 60;
  const auto r = cluster(pts, 4, ClusterAlgorithm::hac, 8, options);
  check_partition(r, pts.size(), 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(r.sizes[c] == 100);
}

TEST_CASE("pruning keeps the largest clusters") {
  SUBCASE("max retention") {
    const auto r = prune_smallest(sized({10, 1}), 1);
    CHECK(r.sizes == std::vector<std::size_t>{10});
    CHECK(r.centers.size() == 1);
    CHECK(r.membership.back() == ClusterResult::kUnassigned);
  }
  SUBCASE("keeping all is the identity") {
    const auto in = sized({3, 7, 2});
    const auto r = prune_smallest(in, 3);
    CHECK(r.sizes == in.sizes);
    CHECK(r.membership == in.membership);
    CHECK(r.centers == in.centers);
  }
  SUBCASE("ties go to the lower index") {
    const auto r = prune_smallest(sized({5, 5, 2}), 2);
    CHECK(r.sizes == std::vector<std::size_t>{5, 5});
    CHECK(r.centers[0].x == 0.0);
    CHECK(r.centers[1].x == 1.0);
    const auto r2 = prune_smallest(sized({2, 5, 5}), 1);
    CHECK(r2.centers[0].x == 1.0);
  }
  SUBCASE("survivors are renumbered in their original order") {
    const auto r = prune_smallest(sized({1, 4, 2, 6}), 2);
    CHECK(r.centers[0].x == 1.0);
    CHECK(r.centers[1].x == 3.0);
    CHECK(r.membership == std::vector<int>{-1, 0, 0, 0, 0, -1, -1, 1, 1, 1, 1, 1, 1});
  }
  CHECK_THROWS_AS(prune_smallest(sized({1, 1}), 3), InputError);
}

TEST_CASE("pruning never keeps a cluster smaller than one it drops") {
  Rng rng(46);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> sizes(1 + rng.index(12));
    for (auto& s : sizes) s = rng.index(9);
    const auto keep = rng.index(sizes.size() + 1);
    const auto in = sized(sizes);
    const auto out = prune_smallest(in, keep);
    REQUIRE(out.sizes.size() == keep);
    std::vector<bool> kept(sizes.size(), false);
    for (const auto& c : out.centers) kept[static_cast<std::size_t>(c.x)] = true;
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      for (std::size_t b = 0; b < sizes.size(); ++b) {
        if (kept[a] && !kept[b]) CHECK(sizes[a] >= sizes[b]);
      }
    }
    for (std::size_t c = 0; c < keep; ++c) CHECK(out.sizes[c] == sizes[static_cast<std::size_t>(out.centers[c].x)]);
  }
}

TEST_CASE("layout from centers") {
  GridSpec spec;
  spec.rows = 3;
  spec.cols = 3;
  spec.cell_size = 100.0;

  const std::vector<PlanarPoint> one{{150.0, 250.0}};
  auto r = layout_from_centers(one, spec);
  CHECK(r.layout.counts(2, 1) == 1);
  CHECK(r.layout.total_sites() == 1);
  CHECK(r.warnings.empty());

  const std::vector<PlanarPoint> two{{10.0, 10.0}, {90.0, 90.0}};
  CHECK(layout_from_centers(two, spec).layout.counts(0, 0) == 2);

  const std::vector<PlanarPoint> outside{{-40.0, 120.0}, {1000.0, 1000.0}};
  r = layout_from_centers(outside, spec);
  CHECK(r.clamped == 2);
  CHECK(r.layout.counts(1, 0) == 1);
  CHECK(r.layout.counts(2, 2) == 1);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("initialization places one site per surviving cluster") {
  Rng rng(47);
  std::vector<PlanarPoint> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({rng.uniform(0, 4000), rng.uniform(0, 4000)});
  GridSpec spec;
  spec.rows = 20;
  spec.cols = 20;
  for (auto alg : kAll) {
    InitStrategy st{alg, 12, 3, 5};
    const auto init = initialize_layout(pts, st, spec);
    CHECK(init.layout.layout.total_sites() == 12);
    CHECK(init.clusters.centers.size() == 12);
  }
  CHECK_THROWS_AS((InitStrategy{ClusterAlgorithm::kmeans, 5, -1, 0}.validate()), InputError);
}
