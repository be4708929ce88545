#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sociodyn/scoring.hpp"

namespace sociodyn {

// One ego's contact bundle between two same-day consecutive surveys.
// Contacts come from the ego's own sensor only (directed).
struct EgoWindow {
  std::string ego_id;
  int day = 0;
  Slot slot = Slot::MorningToMidday;
  Instant start = 0;  // start-survey trigger
  Instant end = 0;    // end-survey trigger; hits live in [start, end)
  std::map<std::string, long> contacts;  // alter -> hit count (>= 1)
};

struct IntensityTriple {
  double L = 0;
  double N = 0;
  double H = 0;

  double of(Level l) const { return l == Level::L ? L : l == Level::N ? N : H; }
};

struct WindowReport {
  long events_assigned = 0;
  long events_unassigned = 0;  // outside any ego window
  std::vector<std::string> dropped_alters;  // "ego,day,slot,alter" outside the roster
};

// Windows exist where the ego filled both bounding surveys; hits are bucketed
// by trigger times, half-open on the right. Alters outside the roster are
// dropped with a report entry.
inline std::vector<EgoWindow> build_windows(const std::vector<IrEvent>& events,
                                            const std::vector<SurveyResponse>& surveys,
                                            const StudyConfig& config,
                                            const std::set<std::string>& roster,
                                            WindowReport* report = nullptr) {
  std::set<std::tuple<std::string, int, int>> filled;
  for (const auto& s : surveys) filled.insert({s.participant_id, s.day, static_cast<int>(s.period)});

  std::map<std::tuple<std::string, int, int>, EgoWindow> windows;
  for (const auto& [pid, day, period] : filled) {
    for (Slot slot : {Slot::MorningToMidday, Slot::MiddayToAfternoon}) {
      if (period != static_cast<int>(slot_start(slot))) continue;
      if (!filled.count({pid, day, static_cast<int>(slot_end(slot))})) continue;
      EgoWindow w;
      w.ego_id = pid;
      w.day = day;
      w.slot = slot;
      w.start = config.trigger_instant(day, slot_start(slot));
      w.end = config.trigger_instant(day, slot_end(slot));
      windows[{pid, day, static_cast<int>(slot)}] = std::move(w);
    }
  }

  for (const auto& e : events) {
    int day = config.day_of(e.timestamp);
    if (day == 0) {
      if (report) report->events_unassigned++;
      continue;
    }
    Instant sod = e.timestamp - config.day_start(day);
    std::optional<Slot> slot;
    if (sod >= config.trigger_seconds[0] && sod < config.trigger_seconds[1])
      slot = Slot::MorningToMidday;
    else if (sod >= config.trigger_seconds[1] && sod < config.trigger_seconds[2])
      slot = Slot::MiddayToAfternoon;
    if (!slot) {
      if (report) report->events_unassigned++;
      continue;
    }
    auto it = windows.find({e.ego_id, day, static_cast<int>(*slot)});
    if (it == windows.end()) {
      if (report) report->events_unassigned++;
      continue;
    }
    if (!roster.count(e.alter_id)) {
      if (report)
        report->dropped_alters.push_back(e.ego_id + "," + std::to_string(day) + "," +
                                         to_string(*slot) + "," + e.alter_id);
      continue;
    }
    it->second.contacts[e.alter_id]++;
    if (report) report->events_assigned++;
  }

  std::vector<EgoWindow> out;
  out.reserve(windows.size());
  for (auto& [key, w] : windows) out.push_back(std::move(w));
  return out;
}

// Per-state view of a window: lagged alter levels at the start survey.
// A window is retained for a state only when every alter has that level.
struct WindowStateView {
  std::map<std::string, Level> alter_levels;
  bool retained = false;
};

inline WindowStateView window_state_view(const EgoWindow& w, const ScoredState& state) {
  WindowStateView v;
  for (const auto& [alter, hits] : w.contacts) {
    auto level = state.level_of(alter, w.day, slot_start(w.slot));
    if (!level) return v;  // retained stays false
    v.alter_levels[alter] = *level;
  }
  v.retained = true;
  return v;
}

// Hits with alters at a level divided by the number of unique alters at that
// level; zero where the level has no alters.
inline IntensityTriple intensity(const EgoWindow& w, const WindowStateView& view) {
  std::array<long, 3> hits = {0, 0, 0};
  std::array<long, 3> alters = {0, 0, 0};
  for (const auto& [alter, level] : view.alter_levels) {
    int i = static_cast<int>(level);
    hits[i] += w.contacts.at(alter);
    alters[i] += 1;
  }
  IntensityTriple t;
  if (alters[0]) t.L = static_cast<double>(hits[0]) / static_cast<double>(alters[0]);
  if (alters[1]) t.N = static_cast<double>(hits[1]) / static_cast<double>(alters[1]);
  if (alters[2]) t.H = static_cast<double>(hits[2]) / static_cast<double>(alters[2]);
  return t;
}

// ---------------------------------------------------------------------------
// Homophily descriptives
// ---------------------------------------------------------------------------

struct HomophilyCell {
  long n_windows = 0;
  double count_ratio_mean = 0, count_ratio_sd = 0;  // same-level alters / alters
  double hit_ratio_mean = 0, hit_ratio_sd = 0;      // same-level hits / hits
};

// Ratios of same-level alters (and same-level hits) per window, grouped by the
// ego's own level at the window start.
inline std::map<Level, HomophilyCell> homophily_similarity(const std::vector<EgoWindow>& windows,
                                                           const ScoredState& state) {
  std::map<Level, std::pair<std::vector<double>, std::vector<double>>> ratios;
  for (const auto& w : windows) {
    auto ego_level = state.level_of(w.ego_id, w.day, slot_start(w.slot));
    if (!ego_level) continue;
    auto view = window_state_view(w, state);
    if (!view.retained || view.alter_levels.empty()) continue;
    long same_alters = 0, alters = 0, same_hits = 0, hits = 0;
    for (const auto& [alter, level] : view.alter_levels) {
      long h = w.contacts.at(alter);
      alters += 1;
      hits += h;
      if (level == *ego_level) {
        same_alters += 1;
        same_hits += h;
      }
    }
    auto& [counts, weights] = ratios[*ego_level];
    counts.push_back(static_cast<double>(same_alters) / static_cast<double>(alters));
    weights.push_back(static_cast<double>(same_hits) / static_cast<double>(hits));
  }
  std::map<Level, HomophilyCell> out;
  for (Level l : all_levels()) {
    HomophilyCell cell;
    auto it = ratios.find(l);
    if (it != ratios.end()) {
      cell.n_windows = static_cast<long>(it->second.first.size());
      cell.count_ratio_mean = stats::mean(it->second.first);
      cell.count_ratio_sd = stats::stddev(it->second.first, false);
      cell.hit_ratio_mean = stats::mean(it->second.second);
      cell.hit_ratio_sd = stats::stddev(it->second.second, false);
    }
    out[l] = cell;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregate network
// ---------------------------------------------------------------------------

struct AggregateNetwork {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, long> edges;  // unordered pair -> total hits

  std::map<std::string, long> degrees() const {
    std::map<std::string, long> d;
    for (const auto& n : nodes) d[n] = 0;
    for (const auto& [pair, hits] : edges) {
      d[pair.first]++;
      d[pair.second]++;
    }
    return d;
  }
};

// Symmetric hit totals; edges only where the pair's total is strictly more
// than the threshold.
inline AggregateNetwork aggregate_network(const std::vector<IrEvent>& events, long threshold) {
  if (threshold < 0) throw Error("aggregate_network: threshold must be >= 0");
  std::map<std::pair<std::string, std::string>, long> totals;
  AggregateNetwork net;
  for (const auto& e : events) {
    net.nodes.insert(e.ego_id);
    net.nodes.insert(e.alter_id);
    auto pair = e.ego_id < e.alter_id ? std::make_pair(e.ego_id, e.alter_id)
                                      : std::make_pair(e.alter_id, e.ego_id);
    totals[pair]++;
  }
  for (const auto& [pair, hits] : totals)
    if (hits > threshold) net.edges[pair] = hits;
  return net;
}

// ---------------------------------------------------------------------------
// Degree / interaction descriptives
// ---------------------------------------------------------------------------

struct FiveNumber {
  long n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

inline FiveNumber five_number(std::vector<double> v) {
  FiveNumber f;
  f.n = static_cast<long>(v.size());
  if (v.empty()) return f;
  std::sort(v.begin(), v.end());
  f.min = v.front();
  f.q1 = stats::percentile_type7_sorted(v, 0.25);
  f.median = stats::percentile_type7_sorted(v, 0.5);
  f.q3 = stats::percentile_type7_sorted(v, 0.75);
  f.max = v.back();
  return f;
}

struct ParticipantActivity {
  FiveNumber alters;      // unique alters per window
  FiveNumber interactions;  // total hits per window
};

inline std::map<std::string, ParticipantActivity> degree_and_interaction_stats(
    const std::vector<EgoWindow>& windows) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per;
  for (const auto& w : windows) {
    long hits = 0;
    for (const auto& [alter, h] : w.contacts) hits += h;
    per[w.ego_id].first.push_back(static_cast<double>(w.contacts.size()));
    per[w.ego_id].second.push_back(static_cast<double>(hits));
  }
  std::map<std::string, ParticipantActivity> out;
  for (auto& [pid, vecs] : per)
    out[pid] = {five_number(std::move(vecs.first)), five_number(std::move(vecs.second))};
  return out;
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

inline CorpusStats corpus_stats(const std::vector<IrEvent>& events,
                                const std::vector<SurveyResponse>& surveys,
                                const std::vector<EgoWindow>& windows,
                                const StudyConfig& config) {
  CorpusStats st;
  std::set<std::string> participants;
  for (const auto& s : surveys) participants.insert(s.participant_id);
  for (const auto& e : events) {
    participants.insert(e.ego_id);
    participants.insert(e.alter_id);
  }
  st.n_participants = static_cast<long>(participants.size());
  st.n_surveys = static_cast<long>(surveys.size());
  st.n_ir_hits = static_cast<long>(events.size());
  for (const auto& w : windows) st.n_transient_edges += static_cast<long>(w.contacts.size());
  std::set<std::pair<std::string, int>> present;
  for (const auto& s : surveys) present.insert({s.participant_id, s.day});
  for (const auto& p : participants)
    for (int d = 1; d <= config.n_days; ++d)
      if (!present.count({p, d})) st.n_absences++;
  return st;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline std::string serialize_windows(const std::vector<EgoWindow>& windows,
                                     const Scoring& scoring) {
  std::vector<const ScoredState*> kept;
  for (const auto& st : scoring.states)
    if (st.kept) kept.push_back(&st);
  std::string out = "ego_id,day,slot,alter_id,hits";
  for (const auto* st : kept) out += ",alter_level_" + st->name;
  out += "\n";
  for (const auto& w : windows) {
    for (const auto& [alter, hits] : w.contacts) {
      std::vector<std::string> row = {w.ego_id, std::to_string(w.day), to_string(w.slot), alter,
                                      std::to_string(hits)};
      for (const auto* st : kept) {
        auto level = st->level_of(alter, w.day, slot_start(w.slot));
        row.push_back(level ? to_string(*level) : "");
      }
      out += csv::join_row(row) + "\n";
    }
  }
  return out;
}

inline std::string serialize_intensities(const std::vector<EgoWindow>& windows,
                                         const Scoring& scoring) {
  std::string out = "ego_id,day,slot,state,L,N,H\n";
  for (const auto& w : windows) {
    for (const auto& st : scoring.states) {
      if (!st.kept) continue;
      auto view = window_state_view(w, st);
      if (!view.retained) continue;
      IntensityTriple t = intensity(w, view);
      out += csv::join_row({w.ego_id, std::to_string(w.day), to_string(w.slot), st.name,
                            fmt_num(t.L, 12), fmt_num(t.N, 12), fmt_num(t.H, 12)}) +
             "\n";
    }
  }
  return out;
}

}  // namespace sociodyn
