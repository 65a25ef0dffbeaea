#pragma once

// A corpus directory: one grid file per trial plus an optional truth table.
//
//   trial_000.grid.csv, trial_001.grid.csv, ...
//   truth.csv          trial,assignment,team_legend
//                      trial_000,2,A
//
// assignment names the player (1..3) holding legend B.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbt/gibbs.hpp"
#include "fbt/ingest.hpp"
#include "fbt/text.hpp"

namespace fbt {

struct CorpusEntry {
  std::string name;  // file stem, e.g. "trial_007"
  ObservationGrid grid;
  std::optional<AssignmentHypothesis> assignment;
  std::optional<Legend> team_legend;
};

inline constexpr const char* kGridSuffix = ".grid.csv";

inline std::string trial_name(std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "trial_" + digits;
}

inline ObservationGrid read_grid_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot open " + path.string());
  try {
    return read_grid(is);
  } catch (const input_error& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

inline void write_grid_file(const std::filesystem::path& path, const ObservationGrid& grid) {
  std::ofstream os(path);
  if (!os) throw input_error("cannot write " + path.string());
  write_grid(os, grid);
}

inline std::map<std::string, std::pair<AssignmentHypothesis, std::optional<Legend>>> read_truth(std::istream& is) {
  std::map<std::string, std::pair<AssignmentHypothesis, std::optional<Legend>>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.substr(0, 6) == "trial,") continue;
    const auto f = text::split(body, ',');
    if (f.size() < 2 || f.size() > 3) throw input_error("expected trial,assignment[,team_legend]", line_no);
    const auto player = text::parse_int(f[1], line_no);
    if (player < 1 || player > 3) throw input_error("assignment must name player 1, 2 or 3", line_no);
    std::optional<Legend> team;
    if (f.size() == 3) {
      const auto t = text::trim(f[2]);
      if (t == "A") team = Legend::A;
      else if (t == "B") team = Legend::B;
      else if (!t.empty()) throw input_error("team legend must be A or B", line_no);
    }
    const std::string name(text::trim(f[0]));
    if (!out.emplace(name, std::pair{assignment_from_player(static_cast<int>(player)), team}).second)
      throw input_error("duplicate truth row for " + name, line_no);
  }
  return out;
}

// Entries sorted by name. Truth rows for missing grids are an error.
inline std::vector<CorpusEntry> read_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw input_error("corpus directory not found: " + dir.string());
  std::vector<CorpusEntry> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto file = e.path().filename().string();
    const std::string suffix = kGridSuffix;
    if (!e.is_regular_file() || file.size() <= suffix.size() ||
        file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    out.push_back({file.substr(0, file.size() - suffix.size()), read_grid_file(e.path()), std::nullopt, std::nullopt});
  }
  if (out.empty()) throw input_error("no *.grid.csv files in " + dir.string());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

  const auto truth_path = dir / "truth.csv";
  if (fs::exists(truth_path)) {
    std::ifstream is(truth_path);
    auto truth = read_truth(is);
    for (auto& entry : out)
      if (const auto it = truth.find(entry.name); it != truth.end()) {
        entry.assignment = it->second.first;
        entry.team_legend = it->second.second;
        truth.erase(it);
      }
    if (!truth.empty()) throw input_error("truth.csv names unknown trial " + truth.begin()->first);
  }
  return out;
}

inline void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusEntry>& entries) {
  std::filesystem::create_directories(dir);
  std::ofstream truth(dir / "truth.csv");
  if (!truth) throw input_error("cannot write " + (dir / "truth.csv").string());
  truth << "trial,assignment,team_legend\n";
  for (const auto& e : entries) {
    write_grid_file(dir / (e.name + kGridSuffix), e.grid);
    if (e.assignment)
      truth << e.name << ',' << index(*e.assignment) + 1 << ','
            << (e.team_legend ? (*e.team_legend == Legend::A ? "A" : "B") : "") << '\n';
  }
}

inline TrainingCorpus to_training_corpus(const std::vector<CorpusEntry>& entries) {
  TrainingCorpus c;
  c.reserve(entries.size());
  for (const auto& e : entries) c.push_back({e.grid, e.assignment});
  return c;
}

}  // namespace fbt
