#include "sigdesc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "sigdesc/container.hpp"
#include "sigdesc/error.hpp"

namespace sigdesc {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const Error&) {
    throw Error("config key '" + key + "': '" + v + "' is not a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string str(bool b) { return b ? "true" : "false"; }

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

#define SIGDESC_INT(KEY, FIELD, TYPE)                                                       \
  Key {                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = to_int<TYPE>(k, v);                                                         \
    },                                                                                      \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                          \
  }
#define SIGDESC_REAL(KEY, FIELD)                                                            \
  Key {                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = to_real(k, v);                                                              \
    },                                                                                      \
        [](const RunConfig& c) { return format_double(c.FIELD); }                           \
  }
#define SIGDESC_BOOL(KEY, FIELD)                                                            \
  Key {                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = to_bool(k, v);                                                              \
    },                                                                                      \
        [](const RunConfig& c) { return str(c.FIELD); }                                     \
  }
#define SIGDESC_PATH(KEY, FIELD)                                                            \
  Key {                                                                                     \
    KEY, [](RunConfig& c, const std::string&, const std::string& v) { c.FIELD = v; },      \
        [](const RunConfig& c) { return c.FIELD.string(); }                                 \
  }
#define SIGDESC_LAYOUT(KEY, FIELD)                                                          \
  Key {                                                                                     \
    KEY, [](RunConfig& c, const std::string&, const std::string& v) {                      \
      c.FIELD = parse_layout(v);                                                            \
    },                                                                                      \
        [](const RunConfig& c) { return std::string(to_string(c.FIELD)); }                  \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      SIGDESC_INT("seed", seed, std::uint64_t),
      SIGDESC_PATH("corpus.path", corpus_path),
      SIGDESC_LAYOUT("corpus.layout", corpus_layout),
      SIGDESC_PATH("unlabeled.path", unlabeled_path),
      SIGDESC_LAYOUT("unlabeled.layout", unlabeled_layout),
      SIGDESC_PATH("model.path", model_path),
      SIGDESC_PATH("users.dir", users_dir),
      SIGDESC_PATH("out.dir", out_dir),
      SIGDESC_INT("preprocess.canvas", descriptor.preprocess.canvas, int),
      SIGDESC_BOOL("preprocess.smooth", descriptor.preprocess.smooth),
      SIGDESC_INT("preprocess.spline_points_per_segment",
                  descriptor.preprocess.spline_points_per_segment, int),
      SIGDESC_REAL("preprocess.cov_epsilon", descriptor.preprocess.cov_epsilon),
      SIGDESC_INT("patch.size", descriptor.patch.size, int),
      SIGDESC_INT("patch.stride", descriptor.patch.stride, int),
      SIGDESC_INT("patch.train_count", descriptor.patch.train_count, long),
      SIGDESC_BOOL("patch.skip_blank", descriptor.patch.skip_blank),
      SIGDESC_REAL("patch.blank_threshold", descriptor.patch.blank_threshold),
      SIGDESC_REAL("whiten.epsilon", descriptor.whitening.epsilon),
      SIGDESC_REAL("whiten.retained_variance", descriptor.whitening.retained_variance),
      Key{"whiten.mode",
          [](RunConfig& c, const std::string&, const std::string& v) {
            c.descriptor.whitening.mode = parse_whitening_mode(v);
          },
          [](const RunConfig& c) { return std::string(to_string(c.descriptor.whitening.mode)); }},
      SIGDESC_INT("ae.hidden", descriptor.ae.hidden, int),
      SIGDESC_REAL("ae.lambda", descriptor.ae.lambda),
      SIGDESC_REAL("ae.beta", descriptor.ae.beta),
      SIGDESC_REAL("ae.rho", descriptor.ae.rho),
      SIGDESC_INT("ae.max_iter", descriptor.ae.max_iter, int),
      SIGDESC_INT("ae.lbfgs_memory", descriptor.ae.lbfgs_memory, int),
      SIGDESC_REAL("ae.tol_grad", descriptor.ae.tol_grad),
      SIGDESC_REAL("oneclass.reg", reg),
      SIGDESC_REAL("oneclass.quantile", quantile),
      SIGDESC_INT("eval.k", k, int),
      SIGDESC_INT("synth.users", synth_users, int),
      SIGDESC_INT("synth.genuine", synth_genuine, int),
      SIGDESC_INT("synth.forgery", synth_forgery, int),
      SIGDESC_REAL("synth.genuine_jitter", synth.genuine_jitter),
      SIGDESC_REAL("synth.forgery_perturbation", synth.forgery_perturbation),
      Key{"synth.source",
          [](RunConfig& c, const std::string&, const std::string& v) { c.synth.source = v; },
          [](const RunConfig& c) { return c.synth.source; }},
      Key{"verify.user",
          [](RunConfig& c, const std::string&, const std::string& v) { c.verify_user = v; },
          [](const RunConfig& c) { return c.verify_user; }},
      SIGDESC_PATH("verify.signature", verify_signature),
      SIGDESC_LAYOUT("verify.layout", verify_layout),
  };
  return table;
}

#undef SIGDESC_INT
#undef SIGDESC_REAL
#undef SIGDESC_BOOL
#undef SIGDESC_PATH
#undef SIGDESC_LAYOUT

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, key, value);
      return;
    }
  }
  throw Error("unknown config key '" + key + "'");
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::load(std::istream& in, const std::string& origin) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  load(in, path.string());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

}  // namespace sigdesc
