#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "vertiplan/dataset.hpp"
#include "vertiplan/synthetic.hpp"

namespace fixture {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("vertiplan-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// A city small enough for the whole pipeline to run in well under a second.
inline vertiplan::SyntheticParams small_city() {
  vertiplan::SyntheticParams p;
  p.rows = 20;
  p.cols = 20;
  p.cell_size = 200.0;
  p.time_bins = 4;
  p.hotspots = 5;
  p.trips = 1500;
  p.stations = 4;
  p.site_budget = 12;
  p.service_radius = 600.0;
  p.seed = 99;
  return p;
}

// Writes the bundle into `dir` and returns the path of its config.json.
inline std::filesystem::path write_small_bundle(const std::filesystem::path& dir, const std::string& name = "synthetic") {
  const auto city = vertiplan::generate_synthetic_city(small_city());
  vertiplan::write_synthetic_bundle(city, dir);
  if (name != "synthetic") {
    auto j = vertiplan::read_json_file(dir / "config.json");
    j["dataset"]["name"] = name;
    vertiplan::write_text_file(dir / "config.json", j.dump(2));
  }
  return dir / "config.json";
}

inline vertiplan::Dataset small_dataset(const std::filesystem::path& dir, const std::string& name = "synthetic") {
  return vertiplan::load_dataset(vertiplan::load_config(write_small_bundle(dir, name)));
}

}  // namespace fixture
