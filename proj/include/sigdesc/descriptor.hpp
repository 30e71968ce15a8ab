#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sigdesc/autoencoder.hpp"
#include "sigdesc/container.hpp"
#include "sigdesc/patches.hpp"
#include "sigdesc/preprocess.hpp"
#include "sigdesc/trajectory.hpp"
#include "sigdesc/whitening.hpp"

namespace sigdesc {

inline constexpr long kDescriptorModelVersion = 1;

/// Learned signature descriptor: everything needed to turn a raw trajectory
/// into a fixed-length vector.
struct DescriptorModel {
  PreprocessConfig preprocess;
  PatchConfig patch;
  WhiteningTransform whitening;
  AutoencoderModel ae;
  std::uint64_t seed = 0;
  long version = kDescriptorModelVersion;

  Eigen::Index length() const { return ae.params.hidden(); }
};

struct Descriptor {
  Eigen::VectorXd values;
  std::string source_user;
  Label source_label = Label::genuine;
};

struct DescriptorTrainingConfig {
  PreprocessConfig preprocess;
  PatchConfig patch;
  WhiteningOptions whitening;
  AeConfig ae;
};

/// Self-taught training on unlabeled signatures: preprocess, sample patches,
/// fit whitening, train the autoencoder. `evaluation_sources` lists source
/// tags of corpora the model will be evaluated on; overlaps produce a warning.
DescriptorModel train_descriptor(const std::vector<Trajectory>& unlabeled,
                                 const DescriptorTrainingConfig& cfg, std::uint64_t seed,
                                 const std::vector<std::string>& evaluation_sources = {},
                                 std::vector<std::string>* warnings = nullptr);

/// Mean hidden activation over the whitened patch columns.
Eigen::VectorXd pool_encodings(const DescriptorModel& model, const PatchMatrix& patches);

/// preprocess -> dense patches -> whiten -> encode -> mean pool.
Descriptor describe(const Trajectory& trajectory, const DescriptorModel& model);

/// Reference descriptor without the autoencoder: mean of the whitened dense
/// patches. Used as the raw-pixel baseline in experiments.
Descriptor describe_baseline(const Trajectory& trajectory, const DescriptorModel& model);

ModelContainer to_container(const DescriptorModel& model);
DescriptorModel from_container(const ModelContainer& container);

void save_model(const DescriptorModel& model, const std::filesystem::path& path);
DescriptorModel load_model(const std::filesystem::path& path);

}  // namespace sigdesc
