#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "sociodyn/network.hpp"

namespace sociodyn {

// One ego state transition joined with its window's situational intensities,
// trait z-score and period dummy: the regression row source.
struct TransitionRecord {
  std::string ego_id;
  int day = 0;
  Slot slot = Slot::MorningToMidday;
  std::string state;
  Level from_level = Level::N;
  Level to_level = Level::N;
  IntensityTriple intensities;
  double trait_z = 0;
  int period_dummy = 0;  // 0 midday-targeted, 1 afternoon-targeted
};

struct TransitionExclusions {
  long missing_window_retention = 0;  // alter lacked the lagged level
  long missing_ego_level = 0;         // ego unscored at a bounding survey
  long missing_trait = 0;             // ego without a begin-wave trait z
};

// At most two records per ego per day; no cross-day transitions.
inline std::vector<TransitionRecord> extract_transitions(const std::vector<EgoWindow>& windows,
                                                         const ScoredState& state,
                                                         const Scoring& scoring,
                                                         const StateDef& def,
                                                         TransitionExclusions* excl = nullptr) {
  std::vector<TransitionRecord> out;
  if (!state.kept) return out;
  for (const auto& w : windows) {
    auto from = state.level_of(w.ego_id, w.day, slot_start(w.slot));
    auto to = state.level_of(w.ego_id, w.day, slot_end(w.slot));
    if (!from || !to) {
      if (excl) excl->missing_ego_level++;
      continue;
    }
    auto view = window_state_view(w, state);
    if (!view.retained) {
      if (excl) excl->missing_window_retention++;
      continue;
    }
    auto tz = scoring.trait_z(w.ego_id, def.trait);
    if (!tz) {
      if (excl) excl->missing_trait++;
      continue;
    }
    TransitionRecord r;
    r.ego_id = w.ego_id;
    r.day = w.day;
    r.slot = w.slot;
    r.state = state.name;
    r.from_level = *from;
    r.to_level = *to;
    r.intensities = intensity(w, view);
    r.trait_z = *tz;
    r.period_dummy = slot_period_dummy(w.slot);
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const TransitionRecord& a, const TransitionRecord& b) {
    return std::tie(a.ego_id, a.day, a.slot) < std::tie(b.ego_id, b.day, b.slot);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Design matrices
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& design_terms() {
  static const std::vector<std::string> t = {"Intercept", "L",   "N",   "H",   "T",
                                             "T*L",       "T*N", "T*H", "P",   "P*T"};
  return t;
}

// Rows grouped by cluster (the ego), ordered by (day, slot) within clusters.
struct DesignMatrix {
  std::string state;
  Level from = Level::N;
  Level to = Level::N;
  std::vector<std::string> terms;  // column names, Intercept first
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> cluster_ids;  // one per cluster
  std::vector<int> cluster_offsets;      // size n_clusters + 1
  std::vector<int> slot_of_row;          // correlation slot index per row
  int slot_domain = 2;                   // number of distinct slot indices

  int n_rows() const { return static_cast<int>(X.rows()); }
  int n_terms() const { return static_cast<int>(X.cols()); }
  int n_clusters() const { return static_cast<int>(cluster_ids.size()); }
};

enum class CorrelationSlots { SlotOfDay, DaySlot };

inline DesignMatrix build_design(const std::vector<TransitionRecord>& records, Level from,
                                 Level to, int min_rows,
                                 CorrelationSlots slots = CorrelationSlots::SlotOfDay,
                                 int n_days = 30) {
  DesignMatrix d;
  d.from = from;
  d.to = to;
  d.terms = design_terms();
  std::vector<const TransitionRecord*> rows;
  for (const auto& r : records)
    if (r.from_level == from) rows.push_back(&r);
  if (static_cast<int>(rows.size()) < min_rows)
    throw InsufficientData("design " + std::string(to_string(from)) + "->" + to_string(to) +
                           ": " + std::to_string(rows.size()) + " rows, need " +
                           std::to_string(min_rows));
  d.state = rows.front()->state;
  std::stable_sort(rows.begin(), rows.end(), [](const TransitionRecord* a,
                                                const TransitionRecord* b) {
    return std::tie(a->ego_id, a->day, a->slot) < std::tie(b->ego_id, b->day, b->slot);
  });
  int n = static_cast<int>(rows.size());
  d.X.resize(n, 10);
  d.y.resize(n);
  d.slot_of_row.resize(n);
  d.slot_domain = slots == CorrelationSlots::SlotOfDay ? 2 : 2 * n_days;
  for (int i = 0; i < n; ++i) {
    const TransitionRecord& r = *rows[i];
    double L = r.intensities.L, N = r.intensities.N, H = r.intensities.H;
    double T = r.trait_z, P = r.period_dummy;
    d.X(i, 0) = 1;
    d.X(i, 1) = L;
    d.X(i, 2) = N;
    d.X(i, 3) = H;
    d.X(i, 4) = T;
    d.X(i, 5) = T * L;
    d.X(i, 6) = T * N;
    d.X(i, 7) = T * H;
    d.X(i, 8) = P;
    d.X(i, 9) = P * T;
    d.y(i) = r.to_level == to ? 1.0 : 0.0;
    int s = static_cast<int>(r.slot);
    d.slot_of_row[i] = slots == CorrelationSlots::SlotOfDay ? s : (r.day - 1) * 2 + s;
    if (i == 0 || rows[i - 1]->ego_id != r.ego_id) {
      d.cluster_ids.push_back(r.ego_id);
      d.cluster_offsets.push_back(i);
    }
  }
  d.cluster_offsets.push_back(n);
  return d;
}

inline std::string serialize_transitions(const std::vector<TransitionRecord>& records) {
  std::string out = "state,ego_id,day,slot,from_level,to_level,L,N,H,trait_z,period\n";
  for (const auto& r : records)
    out += csv::join_row({r.state, r.ego_id, std::to_string(r.day), to_string(r.slot),
                          to_string(r.from_level), to_string(r.to_level),
                          fmt_num(r.intensities.L, 12), fmt_num(r.intensities.N, 12),
                          fmt_num(r.intensities.H, 12), fmt_num(r.trait_z, 12),
                          std::to_string(r.period_dummy)}) +
           "\n";
  return out;
}

inline std::string serialize_design(const DesignMatrix& d) {
  std::string out = "cluster_id,slot,response,L,N,H,T,TL,TN,TH,P,PT\n";
  for (int c = 0; c < d.n_clusters(); ++c) {
    for (int i = d.cluster_offsets[c]; i < d.cluster_offsets[c + 1]; ++i) {
      std::vector<std::string> row = {d.cluster_ids[c], std::to_string(d.slot_of_row[i]),
                                      fmt_num(d.y(i), 12)};
      for (int j = 1; j < 10; ++j) row.push_back(fmt_num(d.X(i, j), 12));
      out += csv::join_row(row) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transition counting
// ---------------------------------------------------------------------------

// counts[from][to]
using TransitionCounts = std::array<std::array<long, 3>, 3>;

inline TransitionCounts count_transitions(const std::vector<TransitionRecord>& records) {
  TransitionCounts c{};
  for (const auto& r : records)
    c[static_cast<int>(r.from_level)][static_cast<int>(r.to_level)]++;
  return c;
}

struct CellSummary {
  long max = 0;
  long min = 0;
  double median = 0;
  double mean = 0;
};

// Cross-state summary of each of the nine transition cells.
inline std::map<std::pair<Level, Level>, CellSummary> transition_count_summary(
    const std::vector<TransitionCounts>& per_state) {
  if (per_state.empty()) throw Error("transition summary of zero states");
  std::map<std::pair<Level, Level>, CellSummary> out;
  for (Level from : all_levels()) {
    for (Level to : all_levels()) {
      std::vector<double> values;
      for (const auto& c : per_state)
        values.push_back(static_cast<double>(c[static_cast<int>(from)][static_cast<int>(to)]));
      CellSummary s;
      s.max = static_cast<long>(*std::max_element(values.begin(), values.end()));
      s.min = static_cast<long>(*std::min_element(values.begin(), values.end()));
      s.median = stats::median(values);
      s.mean = stats::mean(values);
      out[{from, to}] = s;
    }
  }
  return out;
}

// Share of transitions landing in each target level. The denominator follows
// the reporting convention of the reference tables: the L column uses all
// transitions, the N column excludes the L->L cell, and the H column excludes
// the L->L and L->N cells.
inline std::array<double, 3> to_level_percentages(const TransitionCounts& c) {
  long total = 0;
  for (Level from : all_levels())
    for (Level to : all_levels()) total += c[static_cast<int>(from)][static_cast<int>(to)];
  long to_l = c[0][0] + c[1][0] + c[2][0];
  long to_n = c[0][1] + c[1][1] + c[2][1];
  long to_h = c[0][2] + c[1][2] + c[2][2];
  std::array<double, 3> out = {0, 0, 0};
  if (total > 0) out[0] = 100.0 * static_cast<double>(to_l) / static_cast<double>(total);
  long denom_n = total - c[0][0];
  if (denom_n > 0) out[1] = 100.0 * static_cast<double>(to_n) / static_cast<double>(denom_n);
  long denom_h = total - c[0][0] - c[0][1];
  if (denom_h > 0) out[2] = 100.0 * static_cast<double>(to_h) / static_cast<double>(denom_h);
  return out;
}

}  // namespace sociodyn
