#include "sigdesc/descriptor.hpp"

#include <algorithm>

#include "sigdesc/error.hpp"

namespace sigdesc {

DescriptorModel train_descriptor(const std::vector<Trajectory>& unlabeled,
                                 const DescriptorTrainingConfig& cfg, std::uint64_t seed,
                                 const std::vector<std::string>& evaluation_sources,
                                 std::vector<std::string>* warnings) {
  if (unlabeled.empty()) throw Error("train_descriptor: no unlabeled signatures");
  cfg.preprocess.validate();
  cfg.patch.validate(cfg.preprocess.canvas);
  cfg.whitening.validate();
  cfg.ae.validate();

  if (warnings != nullptr) {
    for (const auto& source : evaluation_sources) {
      const bool overlap = std::any_of(unlabeled.begin(), unlabeled.end(), [&](const Trajectory& t) {
        return !t.meta.source.empty() && t.meta.source == source;
      });
      if (overlap) {
        warnings->push_back("unlabeled corpus shares source tag '" + source +
                            "' with an evaluation corpus; descriptor data may not be disjoint");
      }
    }
  }

  std::vector<SignatureImage> images;
  images.reserve(unlabeled.size());
  for (const auto& t : unlabeled) images.push_back(preprocess(t, cfg.preprocess));

  const PatchMatrix raw = sample_training_patches(images, cfg.patch, seed);
  DescriptorModel model;
  model.preprocess = cfg.preprocess;
  model.patch = cfg.patch;
  model.seed = seed;
  model.whitening = fit_whitening(raw, cfg.whitening);
  if (warnings != nullptr && model.whitening.underdetermined) {
    warnings->push_back("whitening fit on fewer patches than dimensions + 1");
  }
  AeConfig ae_cfg = cfg.ae;
  ae_cfg.seed = seed;
  model.ae = train(apply_whitening_batch(model.whitening, raw), ae_cfg);
  if (warnings != nullptr && model.ae.line_search_failed) {
    warnings->push_back("autoencoder line search failed after " +
                        std::to_string(model.ae.iterations) + " iterations; kept best parameters");
  }
  return model;
}

Eigen::VectorXd pool_encodings(const DescriptorModel& model, const PatchMatrix& patches) {
  if (patches.cols() < 1) throw Error("pool_encodings: no patches");
  return encode_batch(model.ae, apply_whitening_batch(model.whitening, patches)).rowwise().mean();
}

Descriptor describe(const Trajectory& trajectory, const DescriptorModel& model) {
  const SignatureImage image = preprocess(trajectory, model.preprocess);
  return {pool_encodings(model, extract_dense(image, model.patch)), trajectory.meta.user_id,
          trajectory.meta.label};
}

Descriptor describe_baseline(const Trajectory& trajectory, const DescriptorModel& model) {
  const SignatureImage image = preprocess(trajectory, model.preprocess);
  const PatchMatrix patches = extract_dense(image, model.patch);
  return {apply_whitening_batch(model.whitening, patches).rowwise().mean(), trajectory.meta.user_id,
          trajectory.meta.label};
}

ModelContainer to_container(const DescriptorModel& m) {
  ModelContainer c("descriptor");
  c.set("version", static_cast<long long>(m.version));
  c.set("seed", std::to_string(m.seed));
  c.set("input_dim", static_cast<long long>(m.whitening.input_dim()));
  c.set("whitened_dim", static_cast<long long>(m.whitening.output_dim()));
  c.set("descriptor_dim", static_cast<long long>(m.ae.params.hidden()));
  c.set("preprocess.canvas", static_cast<long long>(m.preprocess.canvas));
  c.set("preprocess.smooth", std::string(m.preprocess.smooth ? "true" : "false"));
  c.set("preprocess.spline_points_per_segment",
        static_cast<long long>(m.preprocess.spline_points_per_segment));
  c.set("preprocess.cov_epsilon", m.preprocess.cov_epsilon);
  c.set("patch.size", static_cast<long long>(m.patch.size));
  c.set("patch.stride", static_cast<long long>(m.patch.stride));
  c.set("patch.train_count", static_cast<long long>(m.patch.train_count));
  c.set("patch.skip_blank", std::string(m.patch.skip_blank ? "true" : "false"));
  c.set("patch.blank_threshold", m.patch.blank_threshold);
  c.set("whiten.epsilon", m.whitening.options.epsilon);
  c.set("whiten.retained_variance", m.whitening.options.retained_variance);
  c.set("whiten.mode", std::string(to_string(m.whitening.options.mode)));
  c.set("whiten.underdetermined", std::string(m.whitening.underdetermined ? "true" : "false"));
  const AeConfig& a = m.ae.config;
  c.set("ae.hidden", static_cast<long long>(a.hidden));
  c.set("ae.lambda", a.lambda);
  c.set("ae.beta", a.beta);
  c.set("ae.rho", a.rho);
  c.set("ae.max_iter", static_cast<long long>(a.max_iter));
  c.set("ae.lbfgs_memory", static_cast<long long>(a.lbfgs_memory));
  c.set("ae.tol_grad", a.tol_grad);
  c.set("ae.seed", std::to_string(a.seed));
  c.set("ae.final_cost", m.ae.final_cost);
  c.add_vector("whitening.mean", m.whitening.mean);
  c.add_matrix("whitening.basis", m.whitening.basis);
  c.add_vector("whitening.eigenvalues", m.whitening.eigenvalues);
  c.add_matrix("ae.W1", m.ae.params.W1);
  c.add_vector("ae.b1", m.ae.params.b1);
  c.add_matrix("ae.W2", m.ae.params.W2);
  c.add_vector("ae.b2", m.ae.params.b2);
  return c;
}

namespace {

bool get_bool(const ModelContainer& c, std::string_view key) {
  const std::string& v = c.get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error("metadata '" + std::string(key) + "' is not a boolean");
}

std::uint64_t get_u64(const ModelContainer& c, std::string_view key) {
  const std::string& v = c.get(key);
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error("metadata '" + std::string(key) + "' is not an unsigned integer");
}

}  // namespace

DescriptorModel from_container(const ModelContainer& c) {
  if (c.kind() != "descriptor") {
    throw Error("model file holds a '" + c.kind() + "' model, expected a descriptor model");
  }
  const long long version = c.get_int("version");
  if (version != kDescriptorModelVersion) {
    throw VersionMismatch("descriptor model", kDescriptorModelVersion, static_cast<long>(version));
  }
  DescriptorModel m;
  m.version = static_cast<long>(version);
  m.seed = get_u64(c, "seed");
  m.preprocess.canvas = static_cast<int>(c.get_int("preprocess.canvas"));
  m.preprocess.smooth = get_bool(c, "preprocess.smooth");
  m.preprocess.spline_points_per_segment =
      static_cast<int>(c.get_int("preprocess.spline_points_per_segment"));
  m.preprocess.cov_epsilon = c.get_double("preprocess.cov_epsilon");
  m.patch.size = static_cast<int>(c.get_int("patch.size"));
  m.patch.stride = static_cast<int>(c.get_int("patch.stride"));
  m.patch.train_count = static_cast<long>(c.get_int("patch.train_count"));
  m.patch.skip_blank = get_bool(c, "patch.skip_blank");
  m.patch.blank_threshold = c.get_double("patch.blank_threshold");
  m.whitening.options.epsilon = c.get_double("whiten.epsilon");
  m.whitening.options.retained_variance = c.get_double("whiten.retained_variance");
  m.whitening.options.mode = parse_whitening_mode(c.get("whiten.mode"));
  m.whitening.underdetermined = get_bool(c, "whiten.underdetermined");
  m.whitening.mean = c.vector("whitening.mean");
  m.whitening.basis = c.matrix("whitening.basis");
  m.whitening.eigenvalues = c.vector("whitening.eigenvalues");

  AeConfig& a = m.ae.config;
  a.hidden = static_cast<int>(c.get_int("ae.hidden"));
  a.lambda = c.get_double("ae.lambda");
  a.beta = c.get_double("ae.beta");
  a.rho = c.get_double("ae.rho");
  a.max_iter = static_cast<int>(c.get_int("ae.max_iter"));
  a.lbfgs_memory = static_cast<int>(c.get_int("ae.lbfgs_memory"));
  a.tol_grad = c.get_double("ae.tol_grad");
  a.seed = get_u64(c, "ae.seed");
  m.ae.final_cost = c.get_double("ae.final_cost");
  m.ae.params.W1 = c.matrix("ae.W1");
  m.ae.params.b1 = c.vector("ae.b1");
  m.ae.params.W2 = c.matrix("ae.W2");
  m.ae.params.b2 = c.vector("ae.b2");
  m.ae.input_dim = m.ae.params.input_dim();

  m.preprocess.validate();
  m.patch.validate(m.preprocess.canvas);
  const auto& p = m.ae.params;
  const bool shapes_ok =
      m.whitening.basis.cols() == m.whitening.mean.size() &&
      m.whitening.mean.size() == m.patch.dimension() && p.W1.rows() == a.hidden &&
      p.W1.cols() == m.whitening.basis.rows() && p.b1.size() == a.hidden &&
      p.W2.rows() == p.W1.cols() && p.W2.cols() == a.hidden && p.b2.size() == p.W1.cols();
  if (!shapes_ok) throw Error("descriptor model arrays have inconsistent shapes");
  return m;
}

void save_model(const DescriptorModel& model, const std::filesystem::path& path) {
  to_container(model).save(path);
}

DescriptorModel load_model(const std::filesystem::path& path) {
  return from_container(ModelContainer::load(path));
}

}  // namespace sigdesc
