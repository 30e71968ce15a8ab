#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sigdesc {

struct PenSample {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;  // milliseconds
  double pressure = 0.0;
  bool pen_down = true;

  friend bool operator==(const PenSample&, const PenSample&) = default;
};

enum class Label { genuine, skilled_forgery };

std::string_view to_string(Label label);

struct TrajectoryMeta {
  std::string user_id;
  Label label = Label::genuine;
  std::string source;

  friend bool operator==(const TrajectoryMeta&, const TrajectoryMeta&) = default;
};

/// Time-ordered pen samples of one signature.
struct Trajectory {
  std::vector<PenSample> samples;
  TrajectoryMeta meta;

  std::size_t size() const { return samples.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Throws Error if the trajectory breaks a structural invariant
/// (fewer than 2 samples, decreasing time, negative or non-finite values).
/// An empty user_id is accepted here; corpora enforce it.
void validate(const Trajectory& trajectory);

struct UserSignatures {
  std::vector<Trajectory> genuine;
  std::vector<Trajectory> skilled_forgeries;
};

/// Signatures grouped by user. std::map keeps iteration order stable.
struct Corpus {
  std::map<std::string, UserSignatures> users;

  std::size_t signature_count() const;
  std::vector<Trajectory> all_genuine() const;
};

}  // namespace sigdesc
