#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sociodyn/gee.hpp"

namespace sociodyn {

enum class TraitScope : int { LowTrait = -1, Pooled = 0, HighTrait = 1 };
enum class SlopeSign : int { Minus = -1, Zero = 0, Plus = 1 };
enum class Effect : int { None = 0, Attraction, Repulsion, Inertia, Push };
enum class Grouping : int { None = 0, Adaptation, Complementarity };

inline const char* to_string(TraitScope s) {
  switch (s) {
    case TraitScope::LowTrait: return "LowTrait";
    case TraitScope::HighTrait: return "HighTrait";
    default: return "Pooled";
  }
}
inline const char* to_string(SlopeSign s) {
  return s == SlopeSign::Plus ? "+" : s == SlopeSign::Minus ? "-" : "0";
}
inline const char* to_string(Effect e) {
  switch (e) {
    case Effect::Attraction: return "Attraction";
    case Effect::Repulsion: return "Repulsion";
    case Effect::Inertia: return "Inertia";
    case Effect::Push: return "Push";
    default: return "None";
  }
}
inline const char* to_string(Grouping g) {
  switch (g) {
    case Grouping::Adaptation: return "A";
    case Grouping::Complementarity: return "C";
    default: return "";
  }
}

struct EffectLabel {
  std::string state;
  Level from = Level::N;
  Level to = Level::N;
  Level alter_level = Level::N;
  TraitScope scope = TraitScope::Pooled;
  SlopeSign slope_sign = SlopeSign::Zero;
  Effect effect = Effect::None;
  Grouping grouping = Grouping::None;
};

struct DiagramArrow {
  Level alter_level = Level::N;
  TraitScope scope = TraitScope::Pooled;
  bool increases = true;  // direction of the transition-probability change
};

struct TransitionDiagram {
  std::string state;
  std::map<std::pair<Level, Level>, std::vector<DiagramArrow>> arrows;
};

enum class ContagionResult : int { NotContagion = 0, ConditionalContagion, Contagion };

inline const char* to_string(ContagionResult v) {
  switch (v) {
    case ContagionResult::Contagion: return "Contagion";
    case ContagionResult::ConditionalContagion: return "ConditionalContagion";
    default: return "NotContagion";
  }
}

struct ContagionVerdict {
  std::string state;
  Level level = Level::H;
  TraitScope scope = TraitScope::Pooled;  // where the conditions held, if anywhere
  ContagionResult verdict = ContagionResult::NotContagion;
  std::string failing_condition;
};

// ---------------------------------------------------------------------------
// Slopes
// ---------------------------------------------------------------------------

// d(logit)/d(intensity of contact with alters at Z), evaluated at trait
// z = -1, 0 or +1. Terms dropped by selection count as zero, as do surviving
// coefficients below the relevance threshold; the threshold is then applied
// once more to the combined slope.
inline SlopeSign marginal_slope(const SelectedModel& model, Level z, TraitScope scope,
                                double relevance_threshold) {
  if (model.trace.chose_null) return SlopeSign::Zero;
  const char* main_name = to_string(z);
  std::string inter_name = std::string("T*") + main_name;
  auto effective = [&](std::string_view term) {
    auto c = model.fit.coef(term);
    if (!c) return 0.0;
    return std::fabs(*c) < relevance_threshold ? 0.0 : *c;
  };
  double t = static_cast<double>(static_cast<int>(scope));
  double slope = effective(main_name) + t * effective(inter_name);
  if (std::fabs(slope) < relevance_threshold) return SlopeSign::Zero;
  return slope > 0 ? SlopeSign::Plus : SlopeSign::Minus;
}

// ---------------------------------------------------------------------------
// Effect taxonomy. Levels are ordered L < N < H.
// ---------------------------------------------------------------------------

inline Effect classify_effect(Level x, Level y, Level z, SlopeSign sign) {
  if (sign == SlopeSign::Zero) return Effect::None;
  bool plus = sign == SlopeSign::Plus;
  int xi = static_cast<int>(x), yi = static_cast<int>(y), zi = static_cast<int>(z);
  if (z == x) {
    // Alters at the ego's own level keep it there (inertia) or expel it (push).
    if (y == x) return plus ? Effect::Inertia : Effect::Push;
    return plus ? Effect::Push : Effect::Inertia;
  }
  // Alters at a different level pull the ego toward their side (attraction)
  // or block moves toward it (repulsion).
  bool toward = (zi < xi && yi < xi) || (zi > xi && yi > xi);
  if (toward) return plus ? Effect::Attraction : Effect::Repulsion;
  return plus ? Effect::Repulsion : Effect::Attraction;
}

inline Grouping grouping_of(Effect e) {
  switch (e) {
    case Effect::Attraction:
    case Effect::Inertia: return Grouping::Adaptation;
    case Effect::Repulsion:
    case Effect::Push: return Grouping::Complementarity;
    default: return Grouping::None;
  }
}

// ---------------------------------------------------------------------------
// Per-state classification
// ---------------------------------------------------------------------------

using StateFits = std::map<std::pair<Level, Level>, SelectedModel>;

struct SummaryMatrix {
  // rows: ego level; columns: alter level x {LowTrait, HighTrait}
  std::array<std::array<std::set<Grouping>, 6>, 3> cells{};

  static int column(Level z, TraitScope scope) {
    return static_cast<int>(z) * 2 + (scope == TraitScope::HighTrait ? 1 : 0);
  }
  std::string cell_text(int row, int col) const {
    std::string s;
    for (Grouping g : cells[row][col]) {
      if (!s.empty()) s += "/";
      s += to_string(g);
    }
    return s;
  }
};

struct StateEffects {
  std::string state;
  std::vector<EffectLabel> labels;  // non-None labels
  TransitionDiagram diagram;
  SummaryMatrix matrix;
  std::vector<ContagionVerdict> verdicts;  // for levels H and L
  int labeled_transitions = 0;             // transitions with at least one arrow
};

inline ContagionVerdict sisa_contagion_test(const std::string& state, const StateFits& fits,
                                            Level v, double relevance_threshold);

namespace classify_detail {

// The scopes a fit supports for alters at z: trait-conditional when the
// interaction term survives with a relevant coefficient, pooled otherwise.
inline std::vector<TraitScope> scopes_for(const SelectedModel& m, Level z, double threshold) {
  if (m.trace.chose_null) return {};
  auto relevant = [&](std::string_view term) {
    auto c = m.fit.coef(term);
    return c && std::fabs(*c) >= threshold;
  };
  if (relevant(std::string("T*") + to_string(z)))
    return {TraitScope::LowTrait, TraitScope::HighTrait};
  if (relevant(to_string(z))) return {TraitScope::Pooled};
  return {};
}

}  // namespace classify_detail

inline StateEffects classify_state(const std::string& state, const StateFits& fits,
                                   double relevance_threshold) {
  StateEffects out;
  out.state = state;
  out.diagram.state = state;
  for (const auto& [key, model] : fits) {
    auto [x, y] = key;
    bool any_arrow = false;
    for (Level z : all_levels()) {
      for (TraitScope scope : classify_detail::scopes_for(model, z, relevance_threshold)) {
        SlopeSign sign = marginal_slope(model, z, scope, relevance_threshold);
        if (sign == SlopeSign::Zero) continue;
        EffectLabel label;
        label.state = state;
        label.from = x;
        label.to = y;
        label.alter_level = z;
        label.scope = scope;
        label.slope_sign = sign;
        label.effect = classify_effect(x, y, z, sign);
        label.grouping = grouping_of(label.effect);
        out.labels.push_back(label);
        out.diagram.arrows[{x, y}].push_back({z, scope, sign == SlopeSign::Plus});
        any_arrow = true;
        int row = static_cast<int>(x);
        if (scope == TraitScope::Pooled) {
          out.matrix.cells[row][SummaryMatrix::column(z, TraitScope::LowTrait)].insert(
              label.grouping);
          out.matrix.cells[row][SummaryMatrix::column(z, TraitScope::HighTrait)].insert(
              label.grouping);
        } else {
          out.matrix.cells[row][SummaryMatrix::column(z, scope)].insert(label.grouping);
        }
      }
    }
    if (any_arrow) out.labeled_transitions++;
  }
  for (Level v : {Level::H, Level::L}) out.verdicts.push_back(sisa_contagion_test(state, fits, v, relevance_threshold));
  return out;
}

// ---------------------------------------------------------------------------
// SISa-style contagion conditions
// ---------------------------------------------------------------------------

// (a) transitions into V respond only to alters at V, positively;
// (b) recovery V -> N is independent of social contact.
inline ContagionVerdict sisa_contagion_test(const std::string& state, const StateFits& fits,
                                            Level v, double relevance_threshold) {
  ContagionVerdict out;
  out.state = state;
  out.level = v;
  auto slope = [&](Level from, Level to, Level z, TraitScope scope) {
    auto it = fits.find({from, to});
    if (it == fits.end()) return SlopeSign::Zero;  // missing fit: no effect
    return marginal_slope(it->second, z, scope, relevance_threshold);
  };
  auto holds = [&](TraitScope scope, std::string* why) {
    for (Level z : all_levels()) {
      SlopeSign into = slope(Level::N, v, z, scope);
      if (z == v && into != SlopeSign::Plus) {
        if (why) *why = std::string("N->") + to_string(v) + " lacks a positive " + to_string(z) +
                        " effect";
        return false;
      }
      if (z != v && into != SlopeSign::Zero) {
        if (why) *why = std::string("N->") + to_string(v) + " responds to alters at " + to_string(z);
        return false;
      }
      if (slope(v, Level::N, z, scope) != SlopeSign::Zero) {
        if (why) *why = std::string(to_string(v)) + "->N recovery responds to alters at " +
                        to_string(z);
        return false;
      }
    }
    return true;
  };
  std::string why_pooled;
  if (holds(TraitScope::Pooled, &why_pooled)) {
    out.verdict = ContagionResult::Contagion;
    out.scope = TraitScope::Pooled;
    return out;
  }
  bool low = holds(TraitScope::LowTrait, nullptr);
  bool high = holds(TraitScope::HighTrait, nullptr);
  if (low != high) {
    out.verdict = ContagionResult::ConditionalContagion;
    out.scope = low ? TraitScope::LowTrait : TraitScope::HighTrait;
    out.failing_condition = why_pooled;
    return out;
  }
  if (low && high) {
    // Holds in both classes yet not pooled: a knife-edge of the relevance
    // threshold; treated as conditional on either class.
    out.verdict = ContagionResult::ConditionalContagion;
    out.scope = TraitScope::LowTrait;
    out.failing_condition = why_pooled + " (holds in both trait classes)";
    return out;
  }
  out.verdict = ContagionResult::NotContagion;
  out.failing_condition = why_pooled;
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json effects_to_json(const StateEffects& e) {
  nlohmann::json j;
  j["state"] = e.state;
  auto& labels = j["labels"] = nlohmann::json::array();
  for (const auto& l : e.labels) {
    labels.push_back({{"from", to_string(l.from)},
                      {"to", to_string(l.to)},
                      {"alter_level", to_string(l.alter_level)},
                      {"scope", to_string(l.scope)},
                      {"slope_sign", to_string(l.slope_sign)},
                      {"effect", to_string(l.effect)},
                      {"grouping", std::string(to_string(l.grouping))}});
  }
  auto& arrows = j["diagram"] = nlohmann::json::array();
  for (const auto& [key, list] : e.diagram.arrows) {
    for (const auto& a : list) {
      arrows.push_back({{"from", to_string(key.first)},
                        {"to", to_string(key.second)},
                        {"alter_level", to_string(a.alter_level)},
                        {"scope", to_string(a.scope)},
                        {"direction", a.increases ? "up" : "down"}});
    }
  }
  auto& verdicts = j["contagion"] = nlohmann::json::array();
  for (const auto& v : e.verdicts) {
    verdicts.push_back({{"level", to_string(v.level)},
                        {"verdict", to_string(v.verdict)},
                        {"scope", to_string(v.scope)},
                        {"failing_condition", v.failing_condition}});
  }
  j["labeled_transitions"] = e.labeled_transitions;
  return j;
}

inline std::string serialize_summary_matrix(const std::vector<StateEffects>& all) {
  std::string out =
      "state,ego_level,L_LowTrait,L_HighTrait,N_LowTrait,N_HighTrait,H_LowTrait,H_HighTrait\n";
  for (const auto& e : all) {
    for (Level x : all_levels()) {
      std::vector<std::string> row = {e.state, to_string(x)};
      for (int col = 0; col < 6; ++col)
        row.push_back(e.matrix.cell_text(static_cast<int>(x), col));
      out += csv::join_row(row) + "\n";
    }
  }
  return out;
}

}  // namespace sociodyn
