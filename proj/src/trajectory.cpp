#include "sigdesc/trajectory.hpp"

#include <cmath>

#include "sigdesc/error.hpp"

namespace sigdesc {

std::string_view to_string(Label label) {
  return label == Label::genuine ? "genuine" : "skilled_forgery";
}

void validate(const Trajectory& trajectory) {
  const auto& s = trajectory.samples;
  if (s.size() < 2) {
    throw Error("trajectory has " + std::to_string(s.size()) +
                " samples; at least 2 are required");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t) ||
        !std::isfinite(p.pressure)) {
      throw Error("sample " + std::to_string(i) + " has a non-finite value");
    }
    if (p.pressure < 0.0) {
      throw Error("sample " + std::to_string(i) + " has negative pressure");
    }
    if (i > 0 && p.t < s[i - 1].t) {
      throw Error("timestamps decrease at sample " + std::to_string(i));
    }
  }
}

std::size_t Corpus::signature_count() const {
  std::size_t n = 0;
  for (const auto& [id, u] : users) n += u.genuine.size() + u.skilled_forgeries.size();
  return n;
}

std::vector<Trajectory> Corpus::all_genuine() const {
  std::vector<Trajectory> out;
  for (const auto& [id, u] : users) out.insert(out.end(), u.genuine.begin(), u.genuine.end());
  return out;
}

}  // namespace sigdesc
