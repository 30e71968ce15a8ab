#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sigdesc/trajectory.hpp"

namespace sigdesc {

enum class CorpusLayout { svc2004, canonical };

CorpusLayout parse_layout(std::string_view name);
std::string_view to_string(CorpusLayout layout);

/// SVC2004 task-2 text: a sample count line followed by that many rows of
/// `X Y timestamp button azimuth altitude pressure`. Azimuth and altitude
/// are read and dropped. Errors name the offending line (1-based).
Trajectory parse_svc2004(std::istream& in, TrajectoryMeta meta = {});
Trajectory parse_svc2004(std::string_view text, TrajectoryMeta meta = {});

/// Canonical text: header `x y t p d`, then one `x y t p d` row per sample
/// with d in {0,1}.
Trajectory parse_canonical(std::istream& in, TrajectoryMeta meta = {});
Trajectory parse_canonical(std::string_view text, TrajectoryMeta meta = {});

/// Writes the canonical format with round-trip exact (max_digits10) values.
void write_canonical(std::ostream& out, const Trajectory& trajectory);
std::string to_canonical(const Trajectory& trajectory);

struct CorpusWarning {
  std::filesystem::path path;  // empty for user-level warnings
  std::string message;
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<CorpusWarning> warnings;
  std::size_t parsed_files = 0;
};

/// Reads `<root>/<user>/{genuine,forgery}/*.txt`. Unparseable files become
/// warnings; users with fewer than `min_genuine` genuine signatures are kept
/// but reported. Files are visited in sorted path order.
CorpusLoad load_corpus(const std::filesystem::path& root, CorpusLayout layout,
                       std::size_t min_genuine = 4);

/// Writes a corpus in the canonical layout `<root>/<user>/{genuine,forgery}/NNN.txt`.
void write_corpus(const std::filesystem::path& root, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SyntheticOptions {
  /// Relative i.i.d. Gaussian jitter applied to each curve parameter of a
  /// genuine sample.
  double genuine_jitter = 0.01;
  /// Fixed relative offset (random sign per parameter) separating a skilled
  /// forgery's parameters from the user's latent parameters.
  double forgery_perturbation = 0.1;
  /// Source tag written into every trajectory's metadata.
  std::string source = "synthetic";
};

/// Continuous parameters of one synthetic signature: two sinusoid pairs for
/// x(t) and y(t), a horizontal drift, a pressure profile, duration, two
/// pen-lift positions, slant and speed profile. Every entry is nonzero so relative
/// perturbations act on all of them.
struct CurveParams {
  static constexpr std::size_t kCount = 25;
  std::vector<double> values = std::vector<double>(kCount, 0.0);
};

struct SyntheticSignature {
  Trajectory trajectory;
  CurveParams params;
};

struct SyntheticUser {
  CurveParams latent;
  std::vector<SyntheticSignature> genuine;
  std::vector<SyntheticSignature> forgeries;
};

/// Full generator output, including the parameters behind every trajectory.
std::vector<SyntheticUser> generate_synthetic_users(std::uint64_t seed, int n_users,
                                                    int n_genuine, int n_forgery,
                                                    const SyntheticOptions& options = {});

Corpus generate_synthetic_corpus(std::uint64_t seed, int n_users, int n_genuine,
                                 int n_forgery, const SyntheticOptions& options = {});

/// Renders a parameter set to a trajectory with `n_samples` samples.
Trajectory render_curve(const CurveParams& params, int n_samples, TrajectoryMeta meta);

}  // namespace sigdesc
