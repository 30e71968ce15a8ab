#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sigdesc/dataset_io.hpp"
#include "sigdesc/descriptor.hpp"

namespace sigdesc {

/// Every tunable of the command-line tool. Text form is flat `key = value`
/// lines with dotted section prefixes (`ae.hidden = 64`); `#` starts a
/// comment. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;

  std::filesystem::path corpus_path;
  CorpusLayout corpus_layout = CorpusLayout::canonical;
  std::filesystem::path unlabeled_path;
  CorpusLayout unlabeled_layout = CorpusLayout::canonical;
  std::filesystem::path model_path;
  std::filesystem::path users_dir;
  std::filesystem::path out_dir;

  DescriptorTrainingConfig descriptor;

  double reg = 0.9;
  double quantile = 1.0;
  int k = 4;

  int synth_users = 10;
  int synth_genuine = 12;
  int synth_forgery = 10;
  SyntheticOptions synth;

  std::string verify_user;
  std::filesystem::path verify_signature;
  CorpusLayout verify_layout = CorpusLayout::canonical;

  /// Sets one key from its text value; throws Error for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// Parses a `key=value` override.
  void set_assignment(const std::string& assignment);

  void load(std::istream& in, const std::string& origin = "config");
  void load_file(const std::filesystem::path& path);

  /// Effective value of every key, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

}  // namespace sigdesc
