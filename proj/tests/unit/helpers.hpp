#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "sigdesc/trajectory.hpp"

namespace test {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sigdesc-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline sigdesc::Trajectory make_trajectory(std::initializer_list<sigdesc::PenSample> samples,
                                           std::string user = "u") {
  sigdesc::Trajectory t;
  t.samples = samples;
  t.meta.user_id = std::move(user);
  t.meta.source = "test";
  return t;
}

/// Random pen trajectory with positive pressure and increasing time.
inline sigdesc::Trajectory random_trajectory(std::mt19937_64& rng, int n = 40) {
  std::uniform_real_distribution<double> pos(-500.0, 500.0), pr(1.0, 1000.0), dt(1.0, 20.0);
  sigdesc::Trajectory t;
  t.meta.user_id = "r";
  double time = 0.0;
  for (int i = 0; i < n; ++i) {
    t.samples.push_back({pos(rng), pos(rng), time, pr(rng), true});
    time += dt(rng);
  }
  return t;
}

}  // namespace test
