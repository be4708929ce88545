#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sociodyn/data_model.hpp"
#include "sociodyn/stats.hpp"

namespace sociodyn {

struct StateScore {
  std::string participant_id;
  int day = 0;
  Period period = Period::Morning;
  std::string state;
  double score = 0;  // median-centered once the centering step has run
};

struct QuantileCuts {
  std::string state;
  double q33 = 0;
  double q66 = 0;
};

enum class TraitClass : int { LowTrait = -1, MidTrait = 0, HighTrait = 1 };

inline const char* to_string(TraitClass c) {
  switch (c) {
    case TraitClass::LowTrait: return "LowTrait";
    case TraitClass::HighTrait: return "HighTrait";
    default: return "MidTrait";
  }
}

struct TraitProfile {
  std::string participant_id;
  std::string trait;
  double z = 0;
  TraitClass trait_class = TraitClass::MidTrait;
};

inline double recode_reverse_item(double raw, double scale_min, double scale_max) {
  return scale_max + scale_min - raw;
}

// Mean of the state's items with reverse-scored items recoded first.
// A missing item yields no score for that survey/state.
inline std::optional<double> score_state_items(const SurveyResponse& survey,
                                               const StateDef& state) {
  double sum = 0;
  for (const auto& item : state.items) {
    auto it = survey.items.find(item.code);
    if (it == survey.items.end()) return std::nullopt;
    sum += item.reverse ? recode_reverse_item(it->second, state.scale_min, state.scale_max)
                        : it->second;
  }
  return sum / static_cast<double>(state.items.size());
}

// TIPI-style dimension: exactly one standard and one reverse-scored item.
inline std::optional<double> score_big5_state(const SurveyResponse& survey,
                                              const StateDef& state) {
  if (state.items.size() != 2) throw Error("big5 state '" + state.name + "' needs an item pair");
  return score_state_items(survey, state);
}

// PANAS-style affect scale: plain mean of the scale's items.
inline std::optional<double> score_panas_state(const SurveyResponse& survey,
                                               const StateDef& state) {
  return score_state_items(survey, state);
}

// Empirical 33rd/66th percentiles (type 7) of the given sample. Callers center
// scores by the state median before fitting cuts.
inline QuantileCuts fit_quantile_cuts(std::vector<double> scores, const std::string& state_name,
                                      std::vector<std::string>* warnings = nullptr) {
  if (scores.empty()) throw Error("no scores for state '" + state_name + "'");
  std::sort(scores.begin(), scores.end());
  size_t distinct = 1;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] != scores[i - 1]) ++distinct;
  if (distinct == 1) throw DegenerateDistribution(scores.front());
  if (distinct < 3 && warnings)
    warnings->push_back("state '" + state_name + "': only " + std::to_string(distinct) +
                        " distinct score values, tertile cuts are degenerate");
  QuantileCuts cuts;
  cuts.state = state_name;
  cuts.q33 = stats::percentile_type7_sorted(scores, 0.33);
  cuts.q66 = stats::percentile_type7_sorted(scores, 0.66);
  return cuts;
}

// Boundary ties go to the lower level.
inline Level assign_level(double score, const QuantileCuts& cuts) {
  if (score <= cuts.q33) return Level::L;
  if (score <= cuts.q66) return Level::N;
  return Level::H;
}

struct ScreenResult {
  bool keep = true;
  std::string reason;
};

// A state is usable only when the tertile partition is feasible: distinct
// cutpoints and no level with less than the configured share of the sample.
inline ScreenResult skewness_screen(const std::vector<double>& centered_scores,
                                    const QuantileCuts& cuts, double share_floor) {
  if (cuts.q33 == cuts.q66) return {false, "tertile cutpoints coincide"};
  std::array<long, 3> counts = {0, 0, 0};
  for (double s : centered_scores) counts[static_cast<int>(assign_level(s, cuts))]++;
  for (Level l : all_levels()) {
    double share =
        static_cast<double>(counts[static_cast<int>(l)]) / static_cast<double>(centered_scores.size());
    if (share < share_floor)
      return {false, std::string("level ") + to_string(l) + " holds " + fmt_num(share * 100, 3) +
                         "% of scores, under the " + fmt_num(share_floor * 100, 3) + "% floor"};
  }
  return {true, ""};
}

// z against the begin-wave cohort; classes split at +/- 1 SD.
inline std::vector<TraitProfile> normalize_traits(const std::vector<TraitSurvey>& traits,
                                                  const StudyConfig& config) {
  std::vector<TraitProfile> out;
  std::set<std::string> trait_names;
  for (const auto& s : config.states) trait_names.insert(s.trait);
  for (const auto& name : trait_names) {
    std::vector<std::pair<std::string, double>> raws;
    for (const auto& t : traits)
      if (t.wave == Wave::Begin)
        if (auto it = t.raw_trait_scores.find(name); it != t.raw_trait_scores.end())
          raws.emplace_back(t.participant_id, it->second);
    if (raws.size() < 2) {
      if (!raws.empty())
        log_warn("trait '" + name + "' has only one begin-wave observation, skipped");
      continue;
    }
    std::vector<double> values;
    values.reserve(raws.size());
    for (const auto& [pid, v] : raws) values.push_back(v);
    double m = stats::mean(values);
    double sd = stats::stddev(values, config.population_sd);
    if (sd == 0) throw ZeroTraitVariance(name);
    for (const auto& [pid, v] : raws) {
      TraitProfile p;
      p.participant_id = pid;
      p.trait = name;
      p.z = (v - m) / sd;
      p.trait_class = p.z <= -1 ? TraitClass::LowTrait
                      : p.z >= 1 ? TraitClass::HighTrait
                                 : TraitClass::MidTrait;
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus-level scoring driver
// ---------------------------------------------------------------------------

struct ScoredState {
  std::string name;
  double median = 0;
  QuantileCuts cuts;
  bool kept = false;
  std::string discard_reason;
  std::vector<StateScore> scores;  // centered
  // (participant, day, period) -> level; present only for kept states
  std::map<std::tuple<std::string, int, int>, Level> levels;

  std::optional<Level> level_of(const std::string& pid, int day, Period period) const {
    auto it = levels.find({pid, day, static_cast<int>(period)});
    if (it == levels.end()) return std::nullopt;
    return it->second;
  }
};

struct Scoring {
  std::vector<ScoredState> states;
  std::vector<TraitProfile> trait_profiles;
  std::vector<std::string> warnings;

  const ScoredState* find_state(const std::string& name) const {
    for (const auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::optional<double> trait_z(const std::string& pid, const std::string& trait) const {
    for (const auto& p : trait_profiles)
      if (p.participant_id == pid && p.trait == trait) return p.z;
    return std::nullopt;
  }
};

inline Scoring score_corpus(const Corpus& corpus, const StudyConfig& config) {
  Scoring out;
  for (const auto& def : config.states) {
    ScoredState st;
    st.name = def.name;
    std::vector<double> raw;
    std::vector<StateScore> rows;
    for (const auto& survey : corpus.surveys) {
      auto s = score_state_items(survey, def);
      if (!s) continue;
      rows.push_back({survey.participant_id, survey.day, survey.period, def.name, *s});
      raw.push_back(*s);
    }
    if (raw.empty()) {
      st.kept = false;
      st.discard_reason = "no scored surveys";
      out.states.push_back(std::move(st));
      continue;
    }
    st.median = stats::median(raw);
    for (auto& r : rows) r.score -= st.median;
    st.scores = std::move(rows);
    std::vector<double> centered;
    centered.reserve(st.scores.size());
    for (const auto& r : st.scores) centered.push_back(r.score);
    try {
      st.cuts = fit_quantile_cuts(centered, def.name, &out.warnings);
    } catch (const DegenerateDistribution& e) {
      st.kept = false;
      st.discard_reason = e.what();
      out.states.push_back(std::move(st));
      continue;
    }
    auto screen = skewness_screen(centered, st.cuts, config.level_share_floor);
    st.kept = screen.keep;
    st.discard_reason = screen.reason;
    if (st.kept)
      for (const auto& r : st.scores)
        st.levels[{r.participant_id, r.day, static_cast<int>(r.period)}] =
            assign_level(r.score, st.cuts);
    out.states.push_back(std::move(st));
  }
  out.trait_profiles = normalize_traits(corpus.traits, config);
  return out;
}

inline std::string serialize_levels(const Scoring& scoring) {
  std::string out = "participant_id,day,period,state,score,level\n";
  for (const auto& st : scoring.states) {
    if (!st.kept) continue;
    for (const auto& r : st.scores) {
      Level l = st.levels.at({r.participant_id, r.day, static_cast<int>(r.period)});
      out += csv::join_row({r.participant_id, std::to_string(r.day), to_string(r.period), st.name,
                            fmt_num(r.score, 12), to_string(l)}) +
             "\n";
    }
  }
  return out;
}

inline std::string serialize_trait_profiles(const std::vector<TraitProfile>& profiles) {
  std::string out = "participant_id,trait,z,class\n";
  for (const auto& p : profiles)
    out += csv::join_row({p.participant_id, p.trait, fmt_num(p.z, 12), to_string(p.trait_class)}) +
           "\n";
  return out;
}

}  // namespace sociodyn
