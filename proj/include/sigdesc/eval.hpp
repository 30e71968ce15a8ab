#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sigdesc/descriptor.hpp"
#include "sigdesc/trajectory.hpp"

namespace sigdesc {

/// Anomaly scores of one user's test items; lower means more genuine-like.
struct ScoreSet {
  std::string user_id;
  std::vector<double> genuine;
  std::vector<double> forgery;
};

struct RocPoint {
  double far = 0.0;  // forgeries with score <= threshold
  double frr = 0.0;  // genuine with score > threshold
  double threshold = 0.0;
};

/// Points ordered by strictly increasing threshold.
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Thresholds: one below the minimum, midpoints between consecutive distinct
/// pooled scores, one above the maximum.
RocCurve roc(const ScoreSet& scores);

/// Exact far == frr point if one exists (lowest threshold wins), otherwise
/// linear interpolation across the sign change of far - frr.
double eer(const RocCurve& curve);

/// P(genuine < forgery) + P(tie) / 2, via mid-ranks.
double auc(const ScoreSet& scores);

/// Trapezoidal area under (far, 1 - frr).
double auc_trapezoid(const RocCurve& curve);

// ---------------------------------------------------------------------------
// Protocol

enum class TestLabel { genuine, skilled, random };
std::string_view to_string(TestLabel label);

struct SignatureRef {
  std::string user_id;
  Label label = Label::genuine;
  std::size_t index = 0;  // into the user's genuine or skilled_forgeries list

  friend bool operator==(const SignatureRef&, const SignatureRef&) = default;
};

struct UserFold {
  std::string user_id;
  std::vector<SignatureRef> train;
  std::vector<SignatureRef> test_genuine;
  std::vector<SignatureRef> skilled;
  std::vector<SignatureRef> random;  // other users' genuine signatures
};

struct ProtocolSplit {
  std::vector<UserFold> users;
  std::vector<std::string> excluded;  // fewer than k genuine signatures
};

/// Each user's genuine list is shuffled (fixed per user and seed), cut into k
/// near-equal blocks; block `fold` trains, the rest test.
ProtocolSplit split_protocol(const Corpus& corpus, int fold, int k, std::uint64_t seed);

struct ExperimentConfig {
  int k = 4;
  double reg = 0.9;
  std::uint64_t seed = 0;
};

struct ScoreRecord {
  std::string user_id;
  int fold = 0;
  TestLabel label = TestLabel::genuine;
  double score = 0.0;
};

struct UserResult {
  std::string user_id;
  double eer = 0.0;
  double auc = 0.0;
  std::size_t n_genuine_test = 0;
  std::size_t n_forgery_test = 0;
  double eer_skilled = 0.0;  // NaN when the user has no skilled forgeries
  double eer_random = 0.0;   // NaN when there are no other users
  RocCurve roc;
};

struct EvalReport {
  std::string dataset;
  ExperimentConfig config;
  std::vector<UserResult> users;
  std::vector<std::string> excluded;
  double mean_eer = 0.0;
  double mean_auc = 0.0;
  double mean_eer_skilled = 0.0;
  double mean_eer_random = 0.0;
  double pooled_eer = 0.0;  // one global threshold over every user's scores
  double pooled_auc = 0.0;
  int fold_count = 0;
  std::vector<ScoreRecord> scores;
};

using Describer = std::function<Eigen::VectorXd(const Trajectory&)>;

/// k-fold protocol: per fold and user, fit a Gaussian on the training block
/// and score test genuine, skilled and random forgeries. Scores are pooled
/// over folds per user before computing that user's EER and AUC.
EvalReport run_experiment(const Corpus& corpus, const Describer& describer,
                          const ExperimentConfig& config);

EvalReport run_experiment(const Corpus& corpus, const DescriptorModel& model,
                          const ExperimentConfig& config);

void write_report(std::ostream& out, const EvalReport& report);
void write_scores_csv(std::ostream& out, const EvalReport& report);
void write_roc_csv(std::ostream& out, const RocCurve& curve);

}  // namespace sigdesc
