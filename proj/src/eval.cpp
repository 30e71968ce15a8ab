#include "sigdesc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "sigdesc/error.hpp"
#include "sigdesc/oneclass.hpp"

namespace sigdesc {

namespace {

void require_scores(const ScoreSet& s, std::string_view what) {
  if (s.genuine.empty() || s.forgery.empty()) {
    throw Error(std::string(what) + ": user '" + s.user_id +
                "' needs at least one genuine and one forgery score");
  }
}

double fraction(std::size_t count, std::size_t total) {
  return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

RocCurve roc(const ScoreSet& scores) {
  require_scores(scores, "roc");
  std::vector<double> g = scores.genuine, f = scores.forgery;
  std::sort(g.begin(), g.end());
  std::sort(f.begin(), f.end());
  std::vector<double> pooled;
  pooled.reserve(g.size() + f.size());
  std::merge(g.begin(), g.end(), f.begin(), f.end(), std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> thresholds;
  thresholds.reserve(pooled.size() + 1);
  thresholds.push_back(pooled.front() - std::max(1.0, std::abs(pooled.front())));
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    const double a = pooled[i], b = pooled[i + 1];
    double mid = a + (b - a) / 2.0;
    if (!(mid < b)) mid = a;
    thresholds.push_back(mid);
  }
  thresholds.push_back(pooled.back() + std::max(1.0, std::abs(pooled.back())));

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double tau : thresholds) {
    const auto accepted_forgeries =
        static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), tau) - f.begin());
    const auto rejected_genuine =
        static_cast<std::size_t>(g.end() - std::upper_bound(g.begin(), g.end(), tau));
    curve.points.push_back(
        {fraction(accepted_forgeries, f.size()), fraction(rejected_genuine, g.size()), tau});
  }
  return curve;
}

double eer(const RocCurve& curve) {
  const auto& p = curve.points;
  if (p.empty()) throw Error("eer: empty ROC curve");
  for (const auto& pt : p) {
    if (pt.far == pt.frr) return pt.far;
  }
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double d0 = p[i].far - p[i].frr, d1 = p[i + 1].far - p[i + 1].frr;
    if ((d0 < 0.0) != (d1 < 0.0)) {
      const double u = d0 / (d0 - d1);
      return p[i].frr + u * (p[i + 1].frr - p[i].frr);
    }
  }
  throw Error("eer: far - frr never changes sign");
}

double auc(const ScoreSet& scores) {
  require_scores(scores, "auc");
  struct Item {
    double score;
    bool forgery;
  };
  std::vector<Item> items;
  items.reserve(scores.genuine.size() + scores.forgery.size());
  for (double s : scores.genuine) items.push_back({s, false});
  for (double s : scores.forgery) items.push_back({s, true});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  // Sum of mid-ranks of the forgery scores (ranks are 1-based).
  double forgery_rank_sum = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    std::size_t forgeries = 0;
    while (j < items.size() && items[j].score == items[i].score) {
      forgeries += items[j].forgery ? 1 : 0;
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    forgery_rank_sum += mid_rank * static_cast<double>(forgeries);
    i = j;
  }
  const double nf = static_cast<double>(scores.forgery.size());
  const double ng = static_cast<double>(scores.genuine.size());
  return (forgery_rank_sum - nf * (nf + 1.0) / 2.0) / (ng * nf);
}

double auc_trapezoid(const RocCurve& curve) {
  double area = 0.0;
  const auto& p = curve.points;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    area += (p[i + 1].far - p[i].far) * ((1.0 - p[i].frr) + (1.0 - p[i + 1].frr)) / 2.0;
  }
  return area;
}

std::string_view to_string(TestLabel label) {
  switch (label) {
    case TestLabel::genuine: return "genuine";
    case TestLabel::skilled: return "skilled";
    case TestLabel::random: return "random";
  }
  return "unknown";
}

ProtocolSplit split_protocol(const Corpus& corpus, int fold, int k, std::uint64_t seed) {
  if (k < 2) throw Error("split_protocol: k must be >= 2");
  if (fold < 0 || fold >= k) {
    throw Error("split_protocol: fold " + std::to_string(fold) + " outside [0, " +
                std::to_string(k) + ")");
  }
  ProtocolSplit split;
  std::uint64_t ordinal = 0;
  for (const auto& [user_id, sigs] : corpus.users) {
    ++ordinal;
    const std::size_t n = sigs.genuine.size();
    if (n < static_cast<std::size_t>(k)) {
      split.excluded.push_back(user_id);
      continue;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(ordinal)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    UserFold uf;
    uf.user_id = user_id;
    const std::size_t begin = n * static_cast<std::size_t>(fold) / static_cast<std::size_t>(k);
    const std::size_t end = n * static_cast<std::size_t>(fold + 1) / static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < n; ++i) {
      SignatureRef ref{user_id, Label::genuine, order[i]};
      (i >= begin && i < end ? uf.train : uf.test_genuine).push_back(std::move(ref));
    }
    for (std::size_t i = 0; i < sigs.skilled_forgeries.size(); ++i) {
      uf.skilled.push_back({user_id, Label::skilled_forgery, i});
    }
    for (const auto& [other_id, other] : corpus.users) {
      if (other_id == user_id) continue;
      for (std::size_t i = 0; i < other.genuine.size(); ++i) {
        uf.random.push_back({other_id, Label::genuine, i});
      }
    }
    split.users.push_back(std::move(uf));
  }
  return split;
}

namespace {

using DescriptorCache = std::map<std::string, std::pair<std::vector<Eigen::VectorXd>,
                                                        std::vector<Eigen::VectorXd>>>;

const Eigen::VectorXd& lookup(const DescriptorCache& cache, const SignatureRef& ref) {
  const auto& entry = cache.at(ref.user_id);
  return ref.label == Label::genuine ? entry.first.at(ref.index) : entry.second.at(ref.index);
}

double mean_defined(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double subset_eer(const std::vector<double>& genuine, const std::vector<double>& forgery) {
  if (genuine.empty() || forgery.empty()) return std::numeric_limits<double>::quiet_NaN();
  return eer(roc(ScoreSet{{}, genuine, forgery}));
}

}  // namespace

EvalReport run_experiment(const Corpus& corpus, const Describer& describer,
                          const ExperimentConfig& config) {
  if (corpus.users.empty()) throw Error("run_experiment: empty corpus");
  if (config.k < 2) throw Error("run_experiment: k must be >= 2");

  DescriptorCache cache;
  for (const auto& [user_id, sigs] : corpus.users) {
    auto& entry = cache[user_id];
    for (const auto& t : sigs.genuine) entry.first.push_back(describer(t));
    for (const auto& t : sigs.skilled_forgeries) entry.second.push_back(describer(t));
  }

  EvalReport report;
  report.config = config;
  report.fold_count = config.k;

  struct Pool {
    std::vector<double> genuine, skilled, random;
  };
  std::map<std::string, Pool> pools;
  for (int fold = 0; fold < config.k; ++fold) {
    const ProtocolSplit split = split_protocol(corpus, fold, config.k, config.seed);
    if (fold == 0) report.excluded = split.excluded;
    for (const auto& uf : split.users) {
      std::vector<Descriptor> train;
      for (const auto& ref : uf.train) train.push_back({lookup(cache, ref), uf.user_id, Label::genuine});
      const UserModel model = fit_user_model(train, config.reg, uf.user_id);
      Pool& pool = pools[uf.user_id];
      auto record = [&](const std::vector<SignatureRef>& refs, TestLabel label, std::vector<double>& dst) {
        for (const auto& ref : refs) {
          const double s = score(model, lookup(cache, ref));
          dst.push_back(s);
          report.scores.push_back({uf.user_id, fold, label, s});
        }
      };
      record(uf.test_genuine, TestLabel::genuine, pool.genuine);
      record(uf.skilled, TestLabel::skilled, pool.skilled);
      record(uf.random, TestLabel::random, pool.random);
    }
  }
  if (pools.empty()) throw Error("run_experiment: every user was excluded");

  ScoreSet pooled_all{"*", {}, {}};
  std::vector<double> eers, aucs, skilled_eers, random_eers;
  for (const auto& [user_id, pool] : pools) {
    ScoreSet set{user_id, pool.genuine, pool.skilled};
    set.forgery.insert(set.forgery.end(), pool.random.begin(), pool.random.end());
    if (set.forgery.empty()) continue;  // single-user corpus without skilled forgeries
    UserResult r;
    r.user_id = user_id;
    r.roc = roc(set);
    r.eer = eer(r.roc);
    r.auc = auc(set);
    r.n_genuine_test = set.genuine.size();
    r.n_forgery_test = set.forgery.size();
    r.eer_skilled = subset_eer(pool.genuine, pool.skilled);
    r.eer_random = subset_eer(pool.genuine, pool.random);
    eers.push_back(r.eer);
    aucs.push_back(r.auc);
    skilled_eers.push_back(r.eer_skilled);
    random_eers.push_back(r.eer_random);
    pooled_all.genuine.insert(pooled_all.genuine.end(), set.genuine.begin(), set.genuine.end());
    pooled_all.forgery.insert(pooled_all.forgery.end(), set.forgery.begin(), set.forgery.end());
    report.users.push_back(std::move(r));
  }
  if (report.users.empty()) throw Error("run_experiment: no user has forgery scores");
  report.mean_eer = mean_defined(eers);
  report.mean_auc = mean_defined(aucs);
  report.mean_eer_skilled = mean_defined(skilled_eers);
  report.mean_eer_random = mean_defined(random_eers);
  report.pooled_eer = eer(roc(pooled_all));
  report.pooled_auc = auc(pooled_all);
  if (!corpus.users.empty() && !corpus.users.begin()->second.genuine.empty()) {
    report.dataset = corpus.users.begin()->second.genuine.front().meta.source;
  }
  return report;
}

EvalReport run_experiment(const Corpus& corpus, const DescriptorModel& model,
                          const ExperimentConfig& config) {
  return run_experiment(
      corpus, [&model](const Trajectory& t) { return describe(t, model).values; }, config);
}

namespace {

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_report(std::ostream& out, const EvalReport& r) {
  out << "# signature verification report\n";
  out << "dataset: " << (r.dataset.empty() ? "unknown" : r.dataset) << '\n';
  out << "folds: " << r.fold_count << '\n';
  out << "reg: " << exact(r.config.reg) << '\n';
  out << "seed: " << r.config.seed << '\n';
  out << "users: " << r.users.size() << '\n';
  out << "excluded:";
  if (r.excluded.empty()) out << " none";
  for (const auto& id : r.excluded) out << ' ' << id;
  out << '\n';
  out << "user_id eer auc n_genuine_test n_forgery_test eer_skilled eer_random\n";
  for (const auto& u : r.users) {
    out << u.user_id << ' ' << fixed(u.eer) << ' ' << fixed(u.auc) << ' ' << u.n_genuine_test << ' '
        << u.n_forgery_test << ' ' << fixed(u.eer_skilled) << ' ' << fixed(u.eer_random) << '\n';
  }
  out << "mean_eer: " << fixed(r.mean_eer) << '\n';
  out << "mean_auc: " << fixed(r.mean_auc) << '\n';
  out << "mean_eer_skilled: " << fixed(r.mean_eer_skilled) << '\n';
  out << "mean_eer_random: " << fixed(r.mean_eer_random) << '\n';
  out << "pooled_eer: " << fixed(r.pooled_eer) << '\n';
  out << "pooled_auc: " << fixed(r.pooled_auc) << '\n';
}

void write_scores_csv(std::ostream& out, const EvalReport& r) {
  out << "user_id,fold,label,score\n";
  for (const auto& s : r.scores) {
    out << s.user_id << ',' << s.fold << ',' << to_string(s.label) << ',' << exact(s.score) << '\n';
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "far,frr,threshold\n";
  for (const auto& p : curve.points) {
    out << exact(p.far) << ',' << exact(p.frr) << ',' << exact(p.threshold) << '\n';
  }
}

}  // namespace sigdesc
