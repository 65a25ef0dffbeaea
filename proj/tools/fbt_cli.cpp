// fbt: simulate, ingest, train, infer and evaluate legend-assignment beliefs.
// Exit codes: 0 success, 1 input error, 2 failed check.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fbt/fbt.hpp"

namespace fs = std::filesystem;
using namespace fbt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCheck = 2;

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path);
  if (!os) throw input_error("cannot write " + path);
  fn(os);
  if (!os) throw input_error("failed writing " + path);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot open " + path);
  return is;
}

ModelParams load_params(const std::string& path) {
  if (path.empty()) return ModelParams{};
  auto is = open_input(path);
  try {
    return read_params(is);
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  try {
    return text::parse_double_list(s);
  } catch (const input_error& e) {
    throw input_error(std::string("--") + what + ": " + e.what());
  }
}

Backend parse_backend(const std::string& s) { return s == "exact" ? Backend::Exact : Backend::Rbpf; }

std::string player_name(const std::optional<AssignmentHypothesis>& a) {
  return a ? std::to_string(index(*a) + 1) : std::string("none");
}

struct FilterOptions {
  std::string backend = "rbpf";
  std::size_t particles = 5000;
  double ess_frac = 0.5;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "Inference backend")->check(CLI::IsMember({"exact", "rbpf"}))->capture_default_str();
    cmd->add_option("--particles", particles, "Particle count for rbpf")->capture_default_str();
    cmd->add_option("--ess-frac", ess_frac, "Resample when ESS falls below this fraction of N")->capture_default_str();
  }
  FilterConfig config(unsigned workers) const {
    FilterConfig fc;
    fc.n_particles = particles;
    fc.ess_threshold_fraction = ess_frac;
    fc.workers = workers;
    fc.validate();
    return fc;
  }
};

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string params_path, out;
  std::size_t trials = 1, ticks = 900;
  double rate = 0.02, fidelity = 0.9, fov_onset = 0.05, fov_duration = 3.0;
  std::uint64_t seed = 0;
  bool events = false;
};

int run_simulate(const SimulateOptions& o) {
  ModelParams p = load_params(o.params_path);
  if (o.params_path.empty()) p.theta = own_legend_theta(o.fidelity);
  std::vector<CorpusEntry> entries;
  for (std::size_t k = 0; k < o.trials; ++k) {
    auto tr = simulate_trial(p, o.ticks, o.rate, FovGenerator{o.fov_onset, o.fov_duration}, stream_key(o.seed, k));
    entries.push_back({trial_name(k), std::move(tr.grid), tr.truth.assignment, tr.truth.team_legend});
  }
  write_corpus(o.out, entries);
  if (o.events)
    for (const auto& e : entries) {
      auto log = grid_to_log(e.grid);
      with_output((fs::path(o.out) / (e.name + ".events.jsonl")).string(), [&](std::ostream& os) { write_event_log(os, log); });
    }
  with_output((fs::path(o.out) / "params.txt").string(), [&](std::ostream& os) { write_params(os, p); });
  std::cerr << "wrote " << entries.size() << " trials to " << o.out << '\n';
  return kExitOk;
}

// ---- ingest ----------------------------------------------------------------

struct IngestOptions {
  std::string log, out;
  double mission_length = 900.0, tick = 1.0, hfov = 125.0, vfov = 70.0;
};

int run_ingest(const IngestOptions& o) {
  auto is = open_input(o.log);
  const auto log = read_event_log(is, o.mission_length);
  bool fatal = false;
  for (const auto& d : validate(log)) {
    std::cerr << (d.fatal() ? "error: " : "warning: ") << o.log << ':';
    if (d.line) std::cerr << d.line << ':';
    std::cerr << ' ' << d.message << '\n';
    fatal |= d.fatal();
  }
  if (fatal) return kExitInput;
  const auto grid = discretize(log, o.tick, FovGeometry{o.hfov / 2.0, o.vfov / 2.0});
  with_output(o.out, [&](std::ostream& os) { write_grid(os, grid); });
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
  std::string corpus, params_path, out, chain;
  std::size_t iterations = 600, burn_in = 100;
  bool unsupervised = false;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

int run_train(const TrainOptions& o) {
  const auto entries = read_corpus(o.corpus);
  GibbsConfig cfg;
  cfg.iterations = o.iterations;
  cfg.burn_in = o.burn_in;
  cfg.seed = o.seed;
  cfg.supervised = !o.unsupervised;
  cfg.workers = o.workers;
  const auto result = gibbs_train(to_training_corpus(entries), cfg, load_params(o.params_path));
  with_output(o.out, [&](std::ostream& os) { write_params(os, result.params); });
  if (!o.chain.empty()) with_output(o.chain, [&](std::ostream& os) { write_chain(os, result.samples); });
  return kExitOk;
}

// ---- infer -----------------------------------------------------------------

struct InferOptions {
  std::string grid, corpus, params_path, out;
  FilterOptions filter;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

int run_infer(const InferOptions& o) {
  const auto params = load_params(o.params_path);
  const auto fc = o.filter.config(o.workers);
  const auto backend = parse_backend(o.filter.backend);
  if (!o.grid.empty()) {
    const auto traj = infer(read_grid_file(o.grid), params, backend, fc, o.seed);
    with_output(o.out, [&](std::ostream& os) { write_trajectory(os, traj); });
    std::cerr << "final prediction: player " << player_name(predict(traj.back().p_assignment)) << '\n';
    return kExitOk;
  }
  if (o.out.empty()) throw input_error("--out DIR is required with --corpus");
  const auto entries = read_corpus(o.corpus);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto traj = infer(entries[k].grid, params, backend, fc, stream_key(o.seed, k));
    with_output((fs::path(o.out) / (entries[k].name + ".traj.csv")).string(),
                [&](std::ostream& os) { write_trajectory(os, traj); });
  }
  std::cerr << "wrote " << entries.size() << " trajectories to " << o.out << '\n';
  return kExitOk;
}

// ---- oracle-check ----------------------------------------------------------

struct OracleCheckOptions {
  std::string grid, corpus, params_path;
  FilterOptions filter;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double max_median_tv = 0.05, max_tv = 0.15;
};

int run_oracle_check(const OracleCheckOptions& o) {
  const auto params = load_params(o.params_path);
  const auto fc = o.filter.config(o.workers);
  std::vector<CorpusEntry> entries;
  if (!o.grid.empty()) entries.push_back({fs::path(o.grid).filename().string(), read_grid_file(o.grid), {}, {}});
  else entries = read_corpus(o.corpus);

  std::vector<double> tv;
  std::cout << "trial,tv_final\n";
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto pf = run_trial(entries[k].grid, fc, params, stream_key(o.seed, k)).back();
    const auto ex = exact_posterior(entries[k].grid, params).back();
    tv.push_back(total_variation(pf.p_assignment, ex.p_assignment));
    std::cout << entries[k].name << ',' << text::format_double(tv.back(), 6) << '\n';
  }
  auto sorted = tv;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double mx = sorted.back();
  const bool ok = med <= o.max_median_tv && mx <= o.max_tv;
  std::cerr << (ok ? "PASS" : "FAIL") << ": median TV " << text::format_double(med, 4) << " (limit "
            << text::format_double(o.max_median_tv, 4) << "), max TV " << text::format_double(mx, 4) << " (limit "
            << text::format_double(o.max_tv, 4) << ")\n";
  return ok ? kExitOk : kExitCheck;
}

// ---- evaluate --------------------------------------------------------------

struct KFoldOptions {
  std::string corpus, params_path, out, thresholds;
  FilterOptions filter;
  std::size_t folds = 5, iterations = 600, burn_in = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

int run_kfold(const KFoldOptions& o) {
  const auto entries = read_corpus(o.corpus);
  KFoldConfig cfg;
  cfg.folds = o.folds;
  cfg.seed = o.seed;
  cfg.gibbs.iterations = o.iterations;
  cfg.gibbs.burn_in = o.burn_in;
  cfg.gibbs.workers = o.workers;
  cfg.filter = o.filter.config(o.workers);
  cfg.backend = parse_backend(o.filter.backend);
  cfg.workers = o.workers;
  if (!o.thresholds.empty()) cfg.thresholds = parse_list(o.thresholds, "thresholds");
  cfg.gibbs.validate();
  const auto rep = kfold_cv(to_training_corpus(entries), cfg, load_params(o.params_path));
  write_report_table(std::cout, rep);
  if (!o.out.empty()) with_output(o.out, [&](std::ostream& os) { write_report_csv(os, rep); });
  return kExitOk;
}

struct AnnotatedOptions {
  std::string corpus, params_path, votes, out, thresholds, checkpoints = "180,480,780";
  FilterOptions filter;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

int run_annotated(const AnnotatedOptions& o) {
  const auto entries = read_corpus(o.corpus);
  const auto params = load_params(o.params_path);
  auto vis = open_input(o.votes);
  const auto votes = read_votes(vis);
  const auto checkpoints = parse_list(o.checkpoints, "checkpoints");
  const auto thresholds = o.thresholds.empty() ? default_thresholds() : parse_list(o.thresholds, "thresholds");
  const auto fc = o.filter.config(o.workers);
  const auto backend = parse_backend(o.filter.backend);

  std::map<std::string, std::size_t> by_name;
  for (std::size_t k = 0; k < entries.size(); ++k) by_name[entries[k].name] = k;
  std::map<std::size_t, BeliefTrajectory> cache;

  std::vector<AssignmentDist> agent;
  std::vector<std::array<AssignmentHypothesis, 3>> human;
  std::vector<AssignmentHypothesis> truths;
  std::vector<std::string> labels;
  for (const auto& v : votes) {
    if (std::find(checkpoints.begin(), checkpoints.end(), v.checkpoint) == checkpoints.end()) continue;
    const auto it = by_name.find(v.trial);
    if (it == by_name.end()) throw input_error("votes name unknown trial " + v.trial);
    const auto& entry = entries[it->second];
    if (!entry.assignment) throw input_error("no ground truth for " + v.trial);
    auto cached = cache.find(it->second);
    if (cached == cache.end())
      cached = cache.emplace(it->second, infer(entry.grid, params, backend, fc, stream_key(o.seed, it->second))).first;
    const double cp[] = {v.checkpoint};
    agent.push_back(checkpoint_predict(cached->second, cp).front().p_assignment);
    human.push_back(v.votes);
    truths.push_back(*entry.assignment);
    labels.push_back(v.trial + "@" + text::format_double(v.checkpoint, 6));
  }
  if (agent.empty()) throw input_error("no vote rows at the requested checkpoints");
  const auto cmp = compare_with_humans(agent, human, truths, thresholds);

  std::cout << "decision points: " << agent.size() << '\n'
            << "agent accuracy: " << text::format_double(cmp.agent_accuracy, 4) << '\n'
            << "human accuracy: " << text::format_double(cmp.human_accuracy, 4) << "  chance: 0.333\n";
  write_curve_table(std::cout, cmp.agent_curve, "agent");
  write_curve_table(std::cout, cmp.human_curve, "human");
  if (!o.out.empty())
    with_output(o.out, [&](std::ostream& os) {
      os << "point,truth,agent_pA_1,agent_pA_2,agent_pA_3,human_pA_1,human_pA_2,human_pA_3\n";
      for (std::size_t k = 0; k < agent.size(); ++k) {
        os << labels[k] << ',' << index(truths[k]) + 1;
        for (double x : cmp.agent[k]) os << ',' << text::format_double(x);
        for (double x : cmp.human[k]) os << ',' << text::format_double(x);
        os << '\n';
      }
    });
  return kExitOk;
}

// ---- curve -----------------------------------------------------------------

struct CurveOptions {
  std::string report, thresholds, out;
};

std::vector<CurvePoint> curve_from_report(const std::string& path, const std::string& thresholds) {
  auto is = open_input(path);
  const auto rows = read_report_csv(is);
  std::vector<AssignmentDist> preds;
  std::vector<AssignmentHypothesis> truths;
  for (const auto& r : rows) {
    preds.push_back(r.prediction);
    truths.push_back(r.truth);
  }
  const auto th = thresholds.empty() ? default_thresholds() : parse_list(thresholds, "thresholds");
  return threshold_curve(preds, truths, th);
}

int run_curve(const CurveOptions& o) {
  const auto curve = curve_from_report(o.report, o.thresholds);
  write_curve_table(std::cout, curve);
  if (!o.out.empty()) with_output(o.out, [&](std::ostream& os) { write_curve_csv(os, curve); });
  return kExitOk;
}

// ---- plot ------------------------------------------------------------------

struct PlotOptions {
  std::string trajectory, report, out, thresholds, checkpoints;
};

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

void write_svg(std::ostream& os, const std::string& title, const std::string& xlabel, const std::string& ylabel,
               const std::vector<Series>& series, const std::vector<double>& vlines) {
  constexpr double W = 720, H = 400, L = 60, R = 130, T = 40, B = 50;
  double xmax = 1.0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) xmax = std::max(xmax, x);
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return H - B - (H - T - B) * y; };
  auto num = [](double v) { return text::format_double(v, 6); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = k / 4.0;
    os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << num(py(y)) << "\" y2=\"" << num(py(y))
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  }
  os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << H - B << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" x2=\"" << L << "\" y1=\"" << T << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"" << L << "\" y=\"" << T - 8 << "\">" << ylabel << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"end\">" << num(xmax) << "</text>\n";
  for (double x : vlines)
    os << "<line x1=\"" << num(px(x)) << "\" x2=\"" << num(px(x)) << "\" y1=\"" << T << "\" y2=\"" << H - B
       << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) os << num(px(x)) << ',' << num(py(y)) << ' ';
    os << "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 10 << "\" x2=\"" << W - R + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
}

int run_plot(const PlotOptions& o) {
  if (o.trajectory.empty() == o.report.empty()) throw input_error("give exactly one of --trajectory or --report");
  const std::string svg = o.out;
  std::string csv = fs::path(o.out).replace_extension(".csv").string();
  if (csv == svg) csv += ".csv";

  if (!o.trajectory.empty()) {
    auto is = open_input(o.trajectory);
    const auto traj = read_trajectory(is);
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
    std::vector<Series> series;
    for (std::size_t a = 0; a < 3; ++a) {
      Series s{"player " + std::to_string(a + 1) + " has B", colors[a], {}};
      for (const auto& snap : traj.snapshots) s.points.emplace_back(static_cast<double>(snap.t), snap.p_assignment[a]);
      series.push_back(std::move(s));
    }
    const auto vlines = o.checkpoints.empty() ? std::vector<double>{} : parse_list(o.checkpoints, "checkpoints");
    with_output(svg, [&](std::ostream& os) { write_svg(os, "Legend assignment belief", "tick", "P(A)", series, vlines); });
    with_output(csv, [&](std::ostream& os) {
      os << "t,pA_1,pA_2,pA_3\n";
      for (const auto& snap : traj.snapshots)
        os << snap.t << ',' << text::format_double(snap.p_assignment[0]) << ','
           << text::format_double(snap.p_assignment[1]) << ',' << text::format_double(snap.p_assignment[2]) << '\n';
    });
  } else {
    const auto curve = curve_from_report(o.report, o.thresholds);
    Series acc{"accuracy", "#1f77b4", {}}, cov{"coverage", "#888888", {}};
    const double n = curve.empty() || curve.front().covered == 0 ? 1.0 : static_cast<double>(curve.front().covered);
    for (const auto& c : curve) {
      if (c.accuracy) acc.points.emplace_back(c.threshold, *c.accuracy);
      cov.points.emplace_back(c.threshold, static_cast<double>(c.covered) / n);
    }
    with_output(svg, [&](std::ostream& os) {
      write_svg(os, "Accuracy by confidence threshold", "threshold", "accuracy / coverage", {acc, cov}, {});
    });
    with_output(csv, [&](std::ostream& os) { write_curve_csv(os, curve); });
  }
  std::cerr << "wrote " << svg << " and " << csv << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief inference over marker-legend assignments in three-player trials"};
  app.require_subcommand(1);
  int code = kExitOk;

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Write a synthetic corpus (grids, truth.csv, params.txt)");
  c_sim->add_option("--out", sim.out, "Corpus directory")->required();
  c_sim->add_option("--params", sim.params_path, "Generating parameters (default: own-legend theta)");
  c_sim->add_option("--trials", sim.trials)->capture_default_str();
  c_sim->add_option("--ticks", sim.ticks, "Horizon in ticks")->capture_default_str();
  c_sim->add_option("--rate", sim.rate, "Placement probability per player per tick")->capture_default_str();
  c_sim->add_option("--fidelity", sim.fidelity, "Own-legend marking fidelity when --params is absent")->capture_default_str();
  c_sim->add_option("--fov-onset", sim.fov_onset)->capture_default_str();
  c_sim->add_option("--fov-duration", sim.fov_duration)->capture_default_str();
  c_sim->add_option("--seed", sim.seed)->capture_default_str();
  c_sim->add_flag("--events", sim.events, "Also write JSON-lines event logs");
  c_sim->callback([&] { code = run_simulate(sim); });

  IngestOptions ing;
  auto* c_ing = app.add_subcommand("ingest", "Discretize a JSON-lines event log into a grid");
  c_ing->add_option("log,--log", ing.log, "Event log")->required()->check(CLI::ExistingFile);
  c_ing->add_option("--out", ing.out, "Grid file (default stdout)");
  c_ing->add_option("--mission-length", ing.mission_length, "Seconds")->capture_default_str();
  c_ing->add_option("--tick", ing.tick, "Tick length in seconds")->capture_default_str();
  c_ing->add_option("--hfov", ing.hfov, "Horizontal field of view, degrees")->capture_default_str();
  c_ing->add_option("--vfov", ing.vfov, "Vertical field of view, degrees")->capture_default_str();
  c_ing->callback([&] { code = run_ingest(ing); });

  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "Learn theta by Gibbs sampling");
  c_tr->add_option("--corpus", tr.corpus)->required();
  c_tr->add_option("--params", tr.params_path, "Initial parameters");
  c_tr->add_option("--out", tr.out, "Trained parameters (default stdout)");
  c_tr->add_option("--chain", tr.chain, "Write every theta draw as CSV");
  c_tr->add_option("--iterations", tr.iterations)->capture_default_str();
  c_tr->add_option("--burn-in", tr.burn_in)->capture_default_str();
  c_tr->add_flag("--unsupervised", tr.unsupervised, "Ignore known assignments");
  c_tr->add_option("--seed", tr.seed)->capture_default_str();
  c_tr->add_option("--workers", tr.workers)->capture_default_str();
  c_tr->callback([&] { code = run_train(tr); });

  InferOptions inf;
  auto* c_inf = app.add_subcommand("infer", "Belief trajectory for a grid or a whole corpus");
  auto* g = c_inf->add_option("--grid", inf.grid, "Grid file")->check(CLI::ExistingFile);
  auto* cdir = c_inf->add_option("--corpus", inf.corpus, "Corpus directory");
  g->excludes(cdir);
  c_inf->add_option("--params", inf.params_path);
  c_inf->add_option("--out", inf.out, "Trajectory file, or directory with --corpus");
  inf.filter.add_to(c_inf);
  c_inf->add_option("--seed", inf.seed)->capture_default_str();
  c_inf->add_option("--workers", inf.workers)->capture_default_str();
  c_inf->callback([&] {
    if (inf.grid.empty() && inf.corpus.empty()) throw CLI::ValidationError("infer", "--grid or --corpus is required");
    code = run_infer(inf);
  });

  OracleCheckOptions oc;
  auto* c_oc = app.add_subcommand("oracle-check", "Compare rbpf with the exact oracle; exit 2 on failure");
  auto* og = c_oc->add_option("--grid", oc.grid)->check(CLI::ExistingFile);
  auto* ocd = c_oc->add_option("--corpus", oc.corpus);
  og->excludes(ocd);
  c_oc->add_option("--params", oc.params_path);
  oc.filter.add_to(c_oc);
  c_oc->add_option("--seed", oc.seed)->capture_default_str();
  c_oc->add_option("--workers", oc.workers)->capture_default_str();
  c_oc->add_option("--max-median-tv", oc.max_median_tv)->capture_default_str();
  c_oc->add_option("--max-tv", oc.max_tv)->capture_default_str();
  c_oc->callback([&] {
    if (oc.grid.empty() && oc.corpus.empty()) throw CLI::ValidationError("oracle-check", "--grid or --corpus is required");
    code = run_oracle_check(oc);
  });

  auto* c_ev = app.add_subcommand("evaluate", "Cross-validation or comparison with human observers");
  c_ev->require_subcommand(1);
  KFoldOptions kf;
  auto* c_kf = c_ev->add_subcommand("kfold", "k-fold cross-validation");
  c_kf->add_option("--corpus", kf.corpus)->required();
  c_kf->add_option("--params", kf.params_path, "Initial parameters");
  c_kf->add_option("--out", kf.out, "Per-trial report CSV");
  c_kf->add_option("--folds", kf.folds)->capture_default_str();
  c_kf->add_option("--iterations", kf.iterations)->capture_default_str();
  c_kf->add_option("--burn-in", kf.burn_in)->capture_default_str();
  c_kf->add_option("--thresholds", kf.thresholds, "Comma-separated, default 0,0.1,...,1");
  kf.filter.add_to(c_kf);
  c_kf->add_option("--seed", kf.seed)->capture_default_str();
  c_kf->add_option("--workers", kf.workers)->capture_default_str();
  c_kf->callback([&] { code = run_kfold(kf); });

  AnnotatedOptions an;
  auto* c_an = c_ev->add_subcommand("annotated", "Agent versus human-observer votes at checkpoints");
  c_an->add_option("--corpus", an.corpus)->required();
  c_an->add_option("--params", an.params_path, "Trained parameters");
  c_an->add_option("--votes", an.votes, "CSV trial,checkpoint,v1,v2,v3")->required()->check(CLI::ExistingFile);
  c_an->add_option("--checkpoints", an.checkpoints, "Seconds")->capture_default_str();
  c_an->add_option("--thresholds", an.thresholds);
  c_an->add_option("--out", an.out, "Per-decision CSV");
  an.filter.add_to(c_an);
  c_an->add_option("--seed", an.seed)->capture_default_str();
  c_an->add_option("--workers", an.workers)->capture_default_str();
  c_an->callback([&] { code = run_annotated(an); });

  CurveOptions cu;
  auto* c_cu = app.add_subcommand("curve", "Accuracy and coverage by confidence threshold");
  c_cu->add_option("--report", cu.report, "Report CSV from evaluate kfold")->required()->check(CLI::ExistingFile);
  c_cu->add_option("--thresholds", cu.thresholds);
  c_cu->add_option("--out", cu.out, "Curve CSV");
  c_cu->callback([&] { code = run_curve(cu); });

  PlotOptions pl;
  auto* c_pl = app.add_subcommand("plot", "SVG plus CSV of a trajectory or a threshold curve");
  auto* pt = c_pl->add_option("--trajectory", pl.trajectory)->check(CLI::ExistingFile);
  auto* pr = c_pl->add_option("--report", pl.report)->check(CLI::ExistingFile);
  pt->excludes(pr);
  c_pl->add_option("--out", pl.out, "SVG path; the CSV is written beside it")->required();
  c_pl->add_option("--thresholds", pl.thresholds);
  c_pl->add_option("--checkpoints", pl.checkpoints, "Vertical markers, seconds");
  c_pl->callback([&] { code = run_plot(pl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return code;
}
