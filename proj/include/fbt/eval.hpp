#pragma once

// Scoring, confidence curves, cross-validation and human-observer comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fbt/exact.hpp"
#include "fbt/gibbs.hpp"
#include "fbt/parallel.hpp"
#include "fbt/rbpf.hpp"
#include "fbt/trajectory.hpp"

namespace fbt {

// Vote frequencies of three observers as a distribution.
inline AssignmentDist human_agent_distribution(std::span<const AssignmentHypothesis> votes) {
  if (votes.size() != 3) throw input_error("human agent needs exactly three votes, got " + std::to_string(votes.size()));
  AssignmentDist d{0.0, 0.0, 0.0};
  for (auto v : votes) d[static_cast<std::size_t>(index(v))] += 1.0 / 3.0;
  return d;
}

inline AssignmentDist normalized(AssignmentDist p) {
  const double s = p[0] + p[1] + p[2];
  if (s > 0.0)
    for (auto& v : p) v /= s;
  return p;
}

// Correct iff the unique argmax is the truth; ties are wrong.
inline bool score(const AssignmentDist& prediction, AssignmentHypothesis truth) {
  const auto winner = predict(normalized(prediction));
  return winner && *winner == truth;
}

struct CurvePoint {
  double threshold = 0.0;
  std::size_t covered = 0;
  std::optional<double> accuracy;  // absent when nothing is covered
};

// A trial counts at a threshold iff its top probability reaches it.
inline std::vector<CurvePoint> threshold_curve(std::span<const AssignmentDist> predictions,
                                               std::span<const AssignmentHypothesis> truths,
                                               std::span<const double> thresholds) {
  if (predictions.size() != truths.size()) throw input_error("predictions and truths differ in length");
  std::vector<CurvePoint> out;
  for (double th : thresholds) {
    if (!(th >= 0.0 && th <= 1.0)) throw input_error("thresholds must lie in [0,1]");
    CurvePoint cp{th, 0, std::nullopt};
    std::size_t correct = 0;
    for (std::size_t k = 0; k < predictions.size(); ++k) {
      const auto p = normalized(predictions[k]);
      if (*std::max_element(p.begin(), p.end()) < th) continue;
      ++cp.covered;
      if (score(p, truths[k])) ++correct;
    }
    if (cp.covered > 0) cp.accuracy = static_cast<double>(correct) / static_cast<double>(cp.covered);
    out.push_back(cp);
  }
  return out;
}

inline std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 0; k <= 10; ++k) t.push_back(k / 10.0);
  return t;
}

// Snapshots at tick floor(checkpoint / tick_seconds) for each checkpoint in seconds.
inline std::vector<PosteriorSnapshot> checkpoint_predict(const BeliefTrajectory& traj,
                                                         std::span<const double> checkpoints,
                                                         double tick_seconds = 1.0) {
  std::vector<PosteriorSnapshot> out;
  for (double c : checkpoints) {
    if (!(c >= 0.0)) throw input_error("checkpoints must be non-negative");
    const auto tick = static_cast<std::size_t>(std::floor(c / tick_seconds));
    if (tick >= traj.size())
      throw input_error("checkpoint " + text::format_double(c, 6) + " s is beyond the trajectory");
    out.push_back(traj.at(tick));
  }
  return out;
}

// Random near-equal partition of [0, n) into k folds.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw input_error("need at least 2 folds");
  if (n < k) throw input_error("corpus has fewer trials than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = Rng::stream(seed, 31);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

enum class Backend { Exact, Rbpf };

struct KFoldConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  GibbsConfig gibbs{};
  FilterConfig filter{};
  Backend backend = Backend::Rbpf;
  std::vector<double> thresholds = default_thresholds();
  unsigned workers = 1;  // trials evaluated concurrently within a fold
};

struct TrialResult {
  std::size_t trial = 0;
  std::size_t fold = 0;
  AssignmentDist prediction{};
  AssignmentHypothesis truth = AssignmentHypothesis::P1GotB;
  bool correct = false;
};

struct EvalReport {
  std::vector<TrialResult> trials;  // ordered by trial index
  std::vector<double> fold_accuracy;
  std::vector<ModelParams> fold_params;
  double accuracy = 0.0;      // pooled over all trials
  double fold_mean = 0.0;
  double fold_sd = 0.0;       // sample standard deviation across folds
  std::vector<CurvePoint> curve;
};

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline BeliefTrajectory infer(const ObservationGrid& grid, const ModelParams& params, Backend backend,
                              const FilterConfig& filter, std::uint64_t seed) {
  return backend == Backend::Exact ? exact_posterior(grid, params) : run_trial(grid, filter, params, seed);
}

// Per fold: train on the other folds (supervised), infer each held-out trial
// with the assignment unknown, score the final-tick prediction.
inline EvalReport kfold_cv(const TrainingCorpus& corpus, const KFoldConfig& config,
                           const ModelParams& params_init = {}) {
  for (const auto& t : corpus)
    if (!t.assignment) throw input_error("cross-validation needs the ground-truth assignment of every trial");
  const auto folds = make_folds(corpus.size(), config.folds, config.seed);

  EvalReport rep;
  rep.trials.resize(corpus.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    TrainingCorpus train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f)
        for (auto k : folds[g]) train.push_back(corpus[k]);
    GibbsConfig gc = config.gibbs;
    gc.seed = stream_key(config.seed, 41, f);
    const auto trained = gibbs_train(train, gc, params_init);
    rep.fold_params.push_back(trained.params);

    const auto& held = folds[f];
    parallel_for(
        held.size(), config.workers,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t h = b; h < e; ++h) {
            const auto k = held[h];
            const auto traj = infer(corpus[k].grid, trained.params, config.backend, config.filter,
                                    stream_key(config.seed, 42, k));
            auto& r = rep.trials[k];
            r.trial = k;
            r.fold = f;
            r.prediction = traj.back().p_assignment;
            r.truth = *corpus[k].assignment;
            r.correct = score(r.prediction, r.truth);
          }
        },
        1);

    std::size_t correct = 0;
    for (auto k : held) correct += rep.trials[k].correct ? 1 : 0;
    rep.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(held.size()));
  }

  std::size_t correct = 0;
  std::vector<AssignmentDist> preds;
  std::vector<AssignmentHypothesis> truths;
  for (const auto& r : rep.trials) {
    correct += r.correct ? 1 : 0;
    preds.push_back(r.prediction);
    truths.push_back(r.truth);
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(corpus.size());
  rep.fold_mean = mean(rep.fold_accuracy);
  rep.fold_sd = sample_sd(rep.fold_accuracy);
  rep.curve = threshold_curve(preds, truths, config.thresholds);
  return rep;
}

inline void write_curve_table(std::ostream& os, std::span<const CurvePoint> curve, const std::string& label = "agent") {
  os << "threshold  " << label << "_accuracy  covered\n";
  for (const auto& c : curve) {
    os << std::fixed << std::setprecision(2) << std::setw(9) << c.threshold << "  ";
    if (c.accuracy) os << std::setw(8 + static_cast<int>(label.size())) << std::setprecision(3) << *c.accuracy;
    else os << std::setw(8 + static_cast<int>(label.size())) << "-";
    os << "  " << std::setw(7) << c.covered << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

inline void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve) {
  os << "threshold,accuracy,covered\n";
  for (const auto& c : curve)
    os << text::format_double(c.threshold) << ',' << (c.accuracy ? text::format_double(*c.accuracy) : "") << ','
       << c.covered << '\n';
}

inline void write_report_table(std::ostream& os, const EvalReport& rep) {
  os << "trials: " << rep.trials.size() << "  folds: " << rep.fold_accuracy.size() << '\n';
  for (std::size_t f = 0; f < rep.fold_accuracy.size(); ++f)
    os << "  fold " << f + 1 << ": accuracy " << text::format_double(rep.fold_accuracy[f], 4) << '\n';
  os << "accuracy (mean +/- sample sd over folds): " << text::format_double(rep.fold_mean, 3) << " +/- "
     << text::format_double(rep.fold_sd, 3) << '\n';
  os << "pooled accuracy: " << text::format_double(rep.accuracy, 4) << "  chance: 0.333\n";
  write_curve_table(os, rep.curve);
}

inline void write_report_csv(std::ostream& os, const EvalReport& rep) {
  os << "trial,fold,pA_1,pA_2,pA_3,truth,prediction,correct\n";
  for (const auto& r : rep.trials) {
    const auto w = predict(r.prediction);
    os << r.trial << ',' << r.fold + 1;
    for (double v : r.prediction) os << ',' << text::format_double(v);
    os << ',' << index(r.truth) + 1 << ',' << (w ? std::to_string(index(*w) + 1) : "none") << ','
       << (r.correct ? 1 : 0) << '\n';
  }
}

// Reads the per-trial rows written by write_report_csv.
inline std::vector<TrialResult> read_report_csv(std::istream& is) {
  std::vector<TrialResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.substr(0, 6) == "trial,") continue;
    const auto f = text::split(body, ',');
    if (f.size() != 8) throw input_error("expected 8 columns in report row", line_no);
    TrialResult r;
    r.trial = static_cast<std::size_t>(text::parse_int(f[0], line_no));
    const auto fold = text::parse_int(f[1], line_no);
    if (fold < 1) throw input_error("fold numbers start at 1", line_no);
    r.fold = static_cast<std::size_t>(fold - 1);
    for (std::size_t a = 0; a < 3; ++a) r.prediction[a] = text::parse_double(f[2 + a], line_no);
    try {
      r.truth = assignment_from_player(static_cast<int>(text::parse_int(f[5], line_no)));
    } catch (const input_error& e) {
      throw input_error(e.what(), line_no);
    }
    r.correct = score(r.prediction, r.truth);
    out.push_back(r);
  }
  return out;
}

// Three observer votes per (trial, checkpoint). Lines: trial,checkpoint,v1,v2,v3
// where each vote names the player believed to hold legend B.
struct VoteRecord {
  std::string trial;
  double checkpoint = 0.0;
  std::array<AssignmentHypothesis, 3> votes{};
};

inline std::vector<VoteRecord> read_votes(std::istream& is) {
  std::vector<VoteRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.substr(0, 6) == "trial,") continue;
    const auto f = text::split(body, ',');
    if (f.size() != 5) throw input_error("expected trial,checkpoint,v1,v2,v3", line_no);
    VoteRecord v;
    v.trial = std::string(text::trim(f[0]));
    v.checkpoint = text::parse_double(f[1], line_no);
    for (std::size_t k = 0; k < 3; ++k) {
      try {
        v.votes[k] = assignment_from_player(static_cast<int>(text::parse_int(f[2 + k], line_no)));
      } catch (const input_error& e) {
        throw input_error(e.what(), line_no);
      }
    }
    out.push_back(v);
  }
  return out;
}

struct AnnotatedComparison {
  std::vector<AssignmentDist> agent;
  std::vector<AssignmentDist> human;
  std::vector<AssignmentHypothesis> truths;
  double agent_accuracy = 0.0;
  double human_accuracy = 0.0;
  std::vector<CurvePoint> agent_curve;
  std::vector<CurvePoint> human_curve;
};

// Agent distributions and human-agent distributions at the same decision point.
inline AnnotatedComparison compare_with_humans(std::span<const AssignmentDist> agent,
                                               std::span<const std::array<AssignmentHypothesis, 3>> votes,
                                               std::span<const AssignmentHypothesis> truths,
                                               std::span<const double> thresholds) {
  if (agent.size() != votes.size() || agent.size() != truths.size())
    throw input_error("agent predictions, votes and truths differ in length");
  AnnotatedComparison out;
  out.agent.assign(agent.begin(), agent.end());
  out.truths.assign(truths.begin(), truths.end());
  std::size_t a = 0, h = 0;
  for (std::size_t k = 0; k < agent.size(); ++k) {
    out.human.push_back(human_agent_distribution(votes[k]));
    a += score(out.agent[k], truths[k]) ? 1 : 0;
    h += score(out.human[k], truths[k]) ? 1 : 0;
  }
  const double n = agent.empty() ? 1.0 : static_cast<double>(agent.size());
  out.agent_accuracy = static_cast<double>(a) / n;
  out.human_accuracy = static_cast<double>(h) / n;
  out.agent_curve = threshold_curve(out.agent, out.truths, thresholds);
  out.human_curve = threshold_curve(out.human, out.truths, thresholds);
  return out;
}

}  // namespace fbt
