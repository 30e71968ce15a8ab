#include "sigdesc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "sigdesc/config.hpp"
#include "sigdesc/dataset_io.hpp"
#include "sigdesc/descriptor.hpp"
#include "sigdesc/error.hpp"
#include "sigdesc/eval.hpp"
#include "sigdesc/oneclass.hpp"

namespace sigdesc {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool force = false;
  // Shorthands for common keys.
  std::string corpus, unlabeled, layout, model, users, out, user, signature;
};

RunConfig resolve(const Options& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg.load_file(o.config_path);
  auto shorthand = [&](const std::string& value, const char* key) {
    if (!value.empty()) cfg.set(key, value);
  };
  shorthand(o.corpus, "corpus.path");
  shorthand(o.unlabeled, "unlabeled.path");
  shorthand(o.model, "model.path");
  shorthand(o.users, "users.dir");
  shorthand(o.out, "out.dir");
  shorthand(o.user, "verify.user");
  shorthand(o.signature, "verify.signature");
  if (!o.layout.empty()) {
    cfg.set("corpus.layout", o.layout);
    cfg.set("unlabeled.layout", o.layout);
    cfg.set("verify.layout", o.layout);
  }
  if (o.seed) cfg.seed = *o.seed;
  for (const auto& assignment : o.overrides) cfg.set_assignment(assignment);
  return cfg;
}

void log_config(std::ostream& err, const std::string& command, const RunConfig& cfg) {
  err << "# command = " << command << '\n';
  for (const auto& [k, v] : cfg.entries()) err << "# " << k << " = " << v << '\n';
}

void require(const fs::path& p, const char* key) {
  if (p.empty()) throw Error("missing required setting '" + std::string(key) + "'");
}

std::string dataset_name(const fs::path& root) {
  const fs::path clean = root.lexically_normal();
  std::string name = clean.filename().string();
  if (name.empty()) name = clean.parent_path().filename().string();
  return name.empty() ? root.string() : name;
}

CorpusLoad load_logged(const fs::path& root, CorpusLayout layout, std::size_t min_genuine,
                       std::ostream& err) {
  CorpusLoad load = load_corpus(root, layout, min_genuine);
  for (const auto& w : load.warnings) {
    err << "warning: " << (w.path.empty() ? "" : w.path.string() + ": ") << w.message << '\n';
  }
  return load;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_learn_descriptor(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.unlabeled_path, "unlabeled.path");
  require(cfg.model_path, "model.path");
  const auto start = std::chrono::steady_clock::now();
  const CorpusLoad load = load_logged(cfg.unlabeled_path, cfg.unlabeled_layout, 0, err);
  std::vector<Trajectory> unlabeled;
  for (const auto& [id, sigs] : load.corpus.users) {
    unlabeled.insert(unlabeled.end(), sigs.genuine.begin(), sigs.genuine.end());
    unlabeled.insert(unlabeled.end(), sigs.skilled_forgeries.begin(), sigs.skilled_forgeries.end());
  }
  for (auto& t : unlabeled) t.meta.source = dataset_name(cfg.unlabeled_path);

  std::vector<std::string> eval_sources;
  if (!cfg.corpus_path.empty()) {
    if (fs::exists(cfg.corpus_path) && fs::exists(cfg.unlabeled_path) &&
        fs::equivalent(cfg.corpus_path, cfg.unlabeled_path)) {
      err << "warning: unlabeled corpus is the evaluation corpus\n";
    }
    eval_sources.push_back(dataset_name(cfg.corpus_path));
  }
  std::vector<std::string> warnings;
  const DescriptorModel model =
      train_descriptor(unlabeled, cfg.descriptor, cfg.seed, eval_sources, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  if (cfg.model_path.has_parent_path()) fs::create_directories(cfg.model_path.parent_path());
  save_model(model, cfg.model_path);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "model: " << cfg.model_path.string() << '\n'
      << "signatures: " << unlabeled.size() << '\n'
      << "input_dim: " << model.whitening.input_dim() << '\n'
      << "whitened_dim: " << model.whitening.output_dim() << '\n'
      << "descriptor_dim: " << model.length() << '\n'
      << "iterations: " << model.ae.iterations << '\n'
      << "initial_cost: " << fmt(model.ae.initial_cost) << '\n'
      << "final_cost: " << fmt(model.ae.final_cost) << '\n'
      << "elapsed_seconds: " << elapsed << '\n';
  return kExitOk;
}

fs::path user_model_path(const RunConfig& cfg, const std::string& user_id) {
  return cfg.users_dir / (user_id + ".model");
}

int cmd_enroll(const RunConfig& cfg, bool force, std::ostream& out, std::ostream& err) {
  require(cfg.model_path, "model.path");
  require(cfg.corpus_path, "corpus.path");
  require(cfg.users_dir, "users.dir");
  const DescriptorModel model = load_model(cfg.model_path);
  const std::uint32_t model_crc = model_checksum(cfg.model_path);
  const CorpusLoad load = load_logged(cfg.corpus_path, cfg.corpus_layout, 1, err);

  if (!force) {
    for (const auto& [user_id, sigs] : load.corpus.users) {
      if (!sigs.genuine.empty() && fs::exists(user_model_path(cfg, user_id))) {
        throw Error("user model '" + user_model_path(cfg, user_id).string() +
                    "' exists; pass --force to overwrite");
      }
    }
  }
  fs::create_directories(cfg.users_dir);
  std::size_t enrolled = 0, skipped = 0;
  for (const auto& [user_id, sigs] : load.corpus.users) {
    if (sigs.genuine.empty()) {
      err << "warning: user '" << user_id << "' has no genuine signatures; skipped\n";
      ++skipped;
      continue;
    }
    std::vector<Descriptor> train;
    for (const auto& t : sigs.genuine) train.push_back(describe(t, model));
    UserModel um = fit_user_model(train, cfg.reg, user_id);
    std::vector<double> scores;
    for (const auto& d : train) scores.push_back(score(um, d.values));
    um = calibrate_threshold(std::move(um), std::move(scores), cfg.quantile);
    save_user_model(um, user_model_path(cfg, user_id), model_crc);
    out << "enrolled " << user_id << " n_train=" << um.n_train << " threshold=" << fmt(*um.threshold)
        << '\n';
    ++enrolled;
  }
  if (enrolled == 0) throw Error("no user could be enrolled");
  if (skipped > 0) err << "warning: " << skipped << " user(s) skipped\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(cfg.model_path, "model.path");
  require(cfg.users_dir, "users.dir");
  require(cfg.verify_signature, "verify.signature");
  if (cfg.verify_user.empty()) throw Error("missing required setting 'verify.user'");
  const fs::path user_path = user_model_path(cfg, cfg.verify_user);
  if (!fs::exists(user_path)) throw Error("unknown user '" + cfg.verify_user + "' (no " + user_path.string() + ")");
  const DescriptorModel model = load_model(cfg.model_path);
  std::uint32_t enrolled_crc = 0;
  const UserModel user = load_user_model(user_path, &enrolled_crc);
  if (enrolled_crc != 0 && enrolled_crc != model_checksum(cfg.model_path)) {
    throw Error("user '" + cfg.verify_user + "' was enrolled with a different descriptor model");
  }
  std::ifstream in(cfg.verify_signature);
  if (!in) throw Error("cannot open signature '" + cfg.verify_signature.string() + "'");
  TrajectoryMeta meta{cfg.verify_user, Label::genuine, "verify"};
  const Trajectory t = cfg.verify_layout == CorpusLayout::svc2004 ? parse_svc2004(in, meta)
                                                                   : parse_canonical(in, meta);
  const Verification v = verify(user, describe(t, model).values);
  out << (v.accept ? "accept" : "reject") << " score=" << fmt(v.score) << " threshold=" << fmt(v.threshold)
      << '\n';
  return v.accept ? kExitOk : kExitReject;
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  body(f);
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.model_path, "model.path");
  require(cfg.corpus_path, "corpus.path");
  require(cfg.out_dir, "out.dir");
  const DescriptorModel model = load_model(cfg.model_path);
  CorpusLoad load = load_logged(cfg.corpus_path, cfg.corpus_layout, static_cast<std::size_t>(cfg.k), err);
  EvalReport report = run_experiment(load.corpus, model, {cfg.k, cfg.reg, cfg.seed});
  report.dataset = dataset_name(cfg.corpus_path) + " (layout " + std::string(to_string(cfg.corpus_layout)) + ")";
  if (cfg.corpus_layout == CorpusLayout::svc2004) report.dataset = "SVC2004: " + report.dataset;

  fs::create_directories(cfg.out_dir / "roc");
  write_text(cfg.out_dir / "report.txt", [&](std::ostream& f) { write_report(f, report); });
  write_text(cfg.out_dir / "scores.csv", [&](std::ostream& f) { write_scores_csv(f, report); });
  for (const auto& u : report.users) {
    write_text(cfg.out_dir / "roc" / (u.user_id + ".csv"), [&](std::ostream& f) { write_roc_csv(f, u.roc); });
  }
  write_report(out, report);
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, bool force, std::ostream& out, std::ostream&) {
  require(cfg.out_dir, "out.dir");
  if (fs::exists(cfg.out_dir) && !fs::is_empty(cfg.out_dir) && !force) {
    throw Error("output directory '" + cfg.out_dir.string() + "' is not empty; pass --force to write into it");
  }
  const Corpus corpus =
      generate_synthetic_corpus(cfg.seed, cfg.synth_users, cfg.synth_genuine, cfg.synth_forgery, cfg.synth);
  write_corpus(cfg.out_dir, corpus);
  out << "wrote " << corpus.users.size() << " users, " << corpus.signature_count() << " signatures to "
      << cfg.out_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online signature verification with a self-taught descriptor", "sigdesc"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "key = value configuration file");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_flag("--force", o.force, "overwrite existing outputs");
    sub->add_option("--set", o.overrides, "override a config key (key=value)")->take_all();
    sub->add_option("--layout", o.layout, "input layout: svc2004 or canonical");
  };
  auto* learn = app.add_subcommand("learn-descriptor", "train the descriptor on unlabeled signatures");
  add_common(learn);
  learn->add_option("--unlabeled", o.unlabeled, "unlabeled corpus root");
  learn->add_option("--corpus", o.corpus, "evaluation corpus (disjointness check only)");
  learn->add_option("--model", o.model, "output descriptor model file");

  auto* enroll = app.add_subcommand("enroll", "fit and calibrate one reference model per user");
  add_common(enroll);
  enroll->add_option("--corpus", o.corpus, "corpus with genuine signatures per user");
  enroll->add_option("--model", o.model, "descriptor model file");
  enroll->add_option("--users", o.users, "directory for user models");

  auto* verify_cmd = app.add_subcommand("verify", "verify one signature against a user");
  add_common(verify_cmd);
  verify_cmd->add_option("--model", o.model, "descriptor model file");
  verify_cmd->add_option("--users", o.users, "directory of user models");
  verify_cmd->add_option("--user", o.user, "claimed user id");
  verify_cmd->add_option("--signature", o.signature, "signature file");

  auto* evaluate = app.add_subcommand("evaluate", "run the k-fold verification protocol");
  add_common(evaluate);
  evaluate->add_option("--corpus", o.corpus, "labelled corpus root");
  evaluate->add_option("--model", o.model, "descriptor model file");
  evaluate->add_option("--out", o.out, "output directory for report and CSVs");

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  add_common(synth);
  synth->add_option("--out", o.out, "output corpus root");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = resolve(o);
    log_config(err, command, cfg);
    if (command == "learn-descriptor") return cmd_learn_descriptor(cfg, out, err);
    if (command == "enroll") return cmd_enroll(cfg, o.force, out, err);
    if (command == "verify") return cmd_verify(cfg, out, err);
    if (command == "evaluate") return cmd_evaluate(cfg, out, err);
    return cmd_synth(cfg, o.force, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace sigdesc
