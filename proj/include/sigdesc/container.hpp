#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sigdesc {

/// Binary container shared by descriptor and user model files: text
/// metadata pairs plus named float64 arrays, closed by a CRC-32 of every
/// preceding byte. docs/model-format.md describes the byte layout.
class ModelContainer {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  struct Array {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;  // row-major
  };

  explicit ModelContainer(std::string kind = {}) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, long long value);
  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

  void add_matrix(std::string name, const Eigen::Ref<const Eigen::MatrixXd>& m);
  void add_vector(std::string name, const Eigen::Ref<const Eigen::VectorXd>& v);
  Eigen::MatrixXd matrix(std::string_view name) const;
  Eigen::VectorXd vector(std::string_view name) const;
  const std::vector<Array>& arrays() const { return arrays_; }

  std::string serialize() const;
  static ModelContainer parse(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static ModelContainer load(const std::filesystem::path& path);

 private:
  const Array& array(std::string_view name) const;

  std::string kind_;
  std::vector<std::pair<std::string, std::string>> metadata_;
  std::vector<Array> arrays_;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Stored CRC-32 of a valid model file; identifies the exact model a user
/// was enrolled with.
std::uint32_t model_checksum(const std::filesystem::path& path);

}  // namespace sigdesc
