#include "sigdesc/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "sigdesc/error.hpp"

namespace sigdesc {
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& msg) {
  throw Error("line " + std::to_string(line_no) + ": " + msg);
}

double parse_number(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail_at(line_no, "non-numeric field '" + std::string(field) + "'");
  }
  return v;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

CorpusLayout parse_layout(std::string_view name) {
  if (name == "svc2004") return CorpusLayout::svc2004;
  if (name == "canonical") return CorpusLayout::canonical;
  throw Error("unknown corpus layout '" + std::string(name) + "' (expected svc2004 or canonical)");
}

std::string_view to_string(CorpusLayout layout) {
  return layout == CorpusLayout::svc2004 ? "svc2004" : "canonical";
}

Trajectory parse_svc2004(std::istream& in, TrajectoryMeta meta) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail_at(1, "missing sample count line");
  ++line_no;
  auto head = split_ws(line);
  if (head.size() != 1) fail_at(line_no, "malformed sample count line");
  long long n = 0;
  {
    auto f = head[0];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), n);
    if (ec != std::errc() || ptr != f.data() + f.size() || n < 0) {
      fail_at(line_no, "malformed sample count '" + std::string(f) + "'");
    }
  }
  if (n < 2) fail_at(line_no, "sample count " + std::to_string(n) + " is below 2");

  Trajectory tr;
  tr.meta = std::move(meta);
  tr.samples.reserve(static_cast<std::size_t>(n));
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (static_cast<long long>(tr.samples.size()) == n) {
      fail_at(line_no, "more rows than the declared count " + std::to_string(n));
    }
    auto f = split_ws(line);
    if (f.size() != 7) {
      fail_at(line_no, "expected 7 fields, found " + std::to_string(f.size()));
    }
    PenSample s;
    s.x = parse_number(f[0], line_no);
    s.y = parse_number(f[1], line_no);
    s.t = parse_number(f[2], line_no);
    s.pen_down = parse_number(f[3], line_no) != 0.0;
    parse_number(f[4], line_no);  // azimuth
    parse_number(f[5], line_no);  // altitude
    s.pressure = parse_number(f[6], line_no);
    if (s.pressure < 0.0) fail_at(line_no, "negative pressure");
    if (!tr.samples.empty() && s.t < tr.samples.back().t) {
      fail_at(line_no, "timestamp decreases (non-monotone time)");
    }
    tr.samples.push_back(s);
  }
  if (static_cast<long long>(tr.samples.size()) != n) {
    fail_at(line_no, "declared " + std::to_string(n) + " rows but found " +
                         std::to_string(tr.samples.size()));
  }
  return tr;
}

Trajectory parse_svc2004(std::string_view text, TrajectoryMeta meta) {
  std::istringstream in{std::string(text)};
  return parse_svc2004(in, std::move(meta));
}

Trajectory parse_canonical(std::istream& in, TrajectoryMeta meta) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto f = split_ws(line);
    if (f.size() != 5 || f[0] != "x" || f[1] != "y" || f[2] != "t" || f[3] != "p" ||
        f[4] != "d") {
      fail_at(line_no, "missing header 'x y t p d'");
    }
    have_header = true;
  }
  if (!have_header) fail_at(line_no + 1, "missing header 'x y t p d'");

  Trajectory tr;
  tr.meta = std::move(meta);
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto f = split_ws(line);
    if (f.size() != 5) fail_at(line_no, "expected 5 fields, found " + std::to_string(f.size()));
    PenSample s;
    s.x = parse_number(f[0], line_no);
    s.y = parse_number(f[1], line_no);
    s.t = parse_number(f[2], line_no);
    s.pressure = parse_number(f[3], line_no);
    if (f[4] == "1") {
      s.pen_down = true;
    } else if (f[4] == "0") {
      s.pen_down = false;
    } else {
      fail_at(line_no, "pen state must be 0 or 1, found '" + std::string(f[4]) + "'");
    }
    if (s.pressure < 0.0) fail_at(line_no, "negative pressure");
    if (!tr.samples.empty() && s.t < tr.samples.back().t) {
      fail_at(line_no, "timestamp decreases (non-monotone time)");
    }
    tr.samples.push_back(s);
  }
  if (tr.samples.size() < 2) {
    fail_at(line_no, "found " + std::to_string(tr.samples.size()) +
                         " samples; at least 2 are required");
  }
  return tr;
}

Trajectory parse_canonical(std::string_view text, TrajectoryMeta meta) {
  std::istringstream in{std::string(text)};
  return parse_canonical(in, std::move(meta));
}

void write_canonical(std::ostream& out, const Trajectory& trajectory) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "x y t p d\n";
  for (const auto& s : trajectory.samples) {
    out << s.x << ' ' << s.y << ' ' << s.t << ' ' << s.pressure << ' '
        << (s.pen_down ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

std::string to_canonical(const Trajectory& trajectory) {
  std::ostringstream out;
  write_canonical(out, trajectory);
  return out.str();
}

CorpusLoad load_corpus(const fs::path& root, CorpusLayout layout, std::size_t min_genuine) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error("corpus root '" + root.string() + "' does not exist or is not a directory");
  }
  std::vector<fs::path> user_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) user_dirs.push_back(entry.path());
  }
  std::sort(user_dirs.begin(), user_dirs.end());

  CorpusLoad result;
  const std::string source(to_string(layout));
  for (const auto& user_dir : user_dirs) {
    const std::string user_id = user_dir.filename().string();
    UserSignatures sigs;
    for (Label label : {Label::genuine, Label::skilled_forgery}) {
      const fs::path dir = user_dir / (label == Label::genuine ? "genuine" : "forgery");
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (entry.is_regular_file() && ext == ".txt") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) {
          result.warnings.push_back({file, "cannot open file"});
          continue;
        }
        try {
          TrajectoryMeta meta{user_id, label, source};
          Trajectory tr = layout == CorpusLayout::svc2004 ? parse_svc2004(in, meta)
                                                          : parse_canonical(in, meta);
          (label == Label::genuine ? sigs.genuine : sigs.skilled_forgeries)
              .push_back(std::move(tr));
          ++result.parsed_files;
        } catch (const Error& e) {
          result.warnings.push_back({file, e.what()});
        }
      }
    }
    if (sigs.genuine.empty() && sigs.skilled_forgeries.empty()) continue;
    if (sigs.genuine.size() < min_genuine) {
      result.warnings.push_back(
          {user_dir, "user '" + user_id + "' has " + std::to_string(sigs.genuine.size()) +
                         " genuine signatures (< " + std::to_string(min_genuine) +
                         "); excluded from protocol evaluation"});
    }
    result.corpus.users.emplace(user_id, std::move(sigs));
  }
  if (result.corpus.users.empty()) {
    throw Error("corpus at '" + root.string() + "' contains no parseable signatures");
  }
  return result;
}

void write_corpus(const fs::path& root, const Corpus& corpus) {
  for (const auto& [user_id, sigs] : corpus.users) {
    for (Label label : {Label::genuine, Label::skilled_forgery}) {
      const auto& list = label == Label::genuine ? sigs.genuine : sigs.skilled_forgeries;
      const fs::path dir = root / user_id / (label == Label::genuine ? "genuine" : "forgery");
      fs::create_directories(dir);
      for (std::size_t i = 0; i < list.size(); ++i) {
        std::ostringstream name;
        name << std::setw(3) << std::setfill('0') << i << ".txt";
        std::ofstream out(dir / name.str(), std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / name.str()).string() + "'");
        write_canonical(out, list[i]);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator

namespace {

// Index layout of CurveParams::values.
enum Param : std::size_t {
  kDrift,                                // horizontal drift over the signature
  kAx1, kFx1, kPx1, kAx2, kFx2, kPx2,    // x sinusoids: amplitude, cycles, phase
  kAy1, kFy1, kPy1, kAy2, kFy2, kPy2,    // y sinusoids
  kPressureBase, kPressureDepth, kPressureFreq, kPressurePhase,
  kDuration,                             // milliseconds
  kLift1, kLift2,                        // pen-lift positions in (0,1)
  kLiftWidth,
  kSlant,                                // shear of x by y
  kSpeedDepth, kSpeedFreq, kSpeedPhase,  // writing-speed modulation
};
static_assert(kSpeedPhase + 1 == CurveParams::kCount);

CurveParams draw_latent(std::mt19937_64& rng) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double two_pi = 2.0 * std::numbers::pi;
  CurveParams p;
  auto& v = p.values;
  v[kDrift] = u(200.0, 400.0);
  v[kAx1] = u(30.0, 80.0);
  v[kFx1] = u(1.0, 3.0);
  v[kPx1] = u(0.5, two_pi);
  v[kAx2] = u(10.0, 40.0);
  v[kFx2] = u(4.0, 8.0);
  v[kPx2] = u(0.5, two_pi);
  v[kAy1] = u(40.0, 100.0);
  v[kFy1] = u(1.5, 4.0);
  v[kPy1] = u(0.5, two_pi);
  v[kAy2] = u(10.0, 40.0);
  v[kFy2] = u(4.0, 9.0);
  v[kPy2] = u(0.5, two_pi);
  v[kPressureBase] = u(300.0, 700.0);
  v[kPressureDepth] = u(0.2, 0.5);
  v[kPressureFreq] = u(1.0, 5.0);
  v[kPressurePhase] = u(0.5, two_pi);
  v[kDuration] = u(1500.0, 4000.0);
  v[kLift1] = u(0.25, 0.4);
  v[kLift2] = u(0.6, 0.75);
  v[kLiftWidth] = u(0.015, 0.03);
  v[kSlant] = u(0.2, 0.8) * (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
  v[kSpeedDepth] = u(0.2, 0.8);
  v[kSpeedFreq] = u(1.0, 3.0);
  v[kSpeedPhase] = u(0.5, two_pi);
  return p;
}

CurveParams jitter(const CurveParams& base, double relative, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CurveParams p = base;
  for (auto& v : p.values) v *= 1.0 + relative * normal(rng);
  return p;
}

CurveParams offset(const CurveParams& base, double relative, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  CurveParams p = base;
  for (auto& v : p.values) v *= 1.0 + (coin(rng) ? relative : -relative);
  return p;
}

// Fixed 50 Hz sampling, clamped to the documented count range.
int sample_count(const CurveParams& p) {
  const double n = std::round(p.values[kDuration] / 20.0);
  return static_cast<int>(std::clamp(n, 80.0, 200.0));
}

}  // namespace

Trajectory render_curve(const CurveParams& params, int n_samples, TrajectoryMeta meta) {
  if (n_samples < 2) throw Error("render_curve needs at least 2 samples");
  const auto& v = params.values;
  const double two_pi = 2.0 * std::numbers::pi;
  Trajectory tr;
  tr.meta = std::move(meta);
  tr.samples.reserve(static_cast<std::size_t>(n_samples));
  const double duration = std::max(v[kDuration], 1.0);
  // Pen position parameter as a function of elapsed time; monotone while depth < 1.
  const double depth = std::clamp(v[kSpeedDepth], 0.0, 0.95);
  const double w = two_pi * std::max(v[kSpeedFreq], 1e-3);
  auto warp = [&](double u) {
    return u + depth * (std::sin(w * u + v[kSpeedPhase]) - std::sin(v[kSpeedPhase])) / w;
  };
  for (int i = 0; i < n_samples; ++i) {
    const double u = static_cast<double>(i) / (n_samples - 1);
    const double tau = warp(u) / warp(1.0);
    PenSample s;
    s.t = duration * u;
    s.x = v[kDrift] * tau + v[kAx1] * std::sin(two_pi * v[kFx1] * tau + v[kPx1]) +
          v[kAx2] * std::sin(two_pi * v[kFx2] * tau + v[kPx2]);
    s.y = v[kAy1] * std::sin(two_pi * v[kFy1] * tau + v[kPy1]) +
          v[kAy2] * std::sin(two_pi * v[kFy2] * tau + v[kPy2]);
    s.x += v[kSlant] * s.y;
    const bool lifted = (tau >= v[kLift1] && tau < v[kLift1] + v[kLiftWidth]) ||
                        (tau >= v[kLift2] && tau < v[kLift2] + v[kLiftWidth]);
    s.pen_down = !lifted;
    const double profile =
        1.0 + v[kPressureDepth] * std::sin(two_pi * v[kPressureFreq] * tau + v[kPressurePhase]);
    s.pressure = lifted ? 0.0 : std::max(0.0, v[kPressureBase] * profile);
    tr.samples.push_back(s);
  }
  return tr;
}

std::vector<SyntheticUser> generate_synthetic_users(std::uint64_t seed, int n_users,
                                                    int n_genuine, int n_forgery,
                                                    const SyntheticOptions& options) {
  if (n_users < 1 || n_genuine < 1 || n_forgery < 1) {
    throw Error("synthetic corpus counts must all be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<SyntheticUser> users;
  users.reserve(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    std::ostringstream id;
    id << 'u' << std::setw(3) << std::setfill('0') << u;
    SyntheticUser user;
    user.latent = draw_latent(rng);
    for (int g = 0; g < n_genuine; ++g) {
      CurveParams p = jitter(user.latent, options.genuine_jitter, rng);
      const int n = sample_count(p);
      user.genuine.push_back(
          {render_curve(p, n, {id.str(), Label::genuine, options.source}), std::move(p)});
    }
    for (int f = 0; f < n_forgery; ++f) {
      CurveParams p = jitter(offset(user.latent, options.forgery_perturbation, rng),
                             options.genuine_jitter, rng);
      const int n = sample_count(p);
      user.forgeries.push_back(
          {render_curve(p, n, {id.str(), Label::skilled_forgery, options.source}),
           std::move(p)});
    }
    users.push_back(std::move(user));
  }
  return users;
}

Corpus generate_synthetic_corpus(std::uint64_t seed, int n_users, int n_genuine, int n_forgery,
                                 const SyntheticOptions& options) {
  Corpus corpus;
  auto users = generate_synthetic_users(seed, n_users, n_genuine, n_forgery, options);
  for (auto& user : users) {
    UserSignatures sigs;
    for (auto& g : user.genuine) sigs.genuine.push_back(std::move(g.trajectory));
    for (auto& f : user.forgeries) sigs.skilled_forgeries.push_back(std::move(f.trajectory));
    const std::string id = sigs.genuine.front().meta.user_id;
    corpus.users.emplace(id, std::move(sigs));
  }
  return corpus;
}

}  // namespace sigdesc
