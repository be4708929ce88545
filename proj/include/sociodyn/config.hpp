#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sociodyn/common.hpp"

namespace sociodyn {

struct ItemDef {
  std::string code;
  bool reverse = false;
};

struct StateDef {
  std::string name;
  std::string trait;          // corresponding trait; defaults to the state name
  std::vector<ItemDef> items;  // the state's survey items
  double scale_min = 1.0;
  double scale_max = 7.0;
};

// Study-wide settings. Timestamps are stored as UTC instants; day/period
// assignment is derived from the calendar start and the trigger offsets.
struct StudyConfig {
  std::vector<StateDef> states;
  Instant study_start = 0;           // 00:00 UTC of study day 1
  int n_days = 30;                   // working-day indices 1..n_days
  std::array<int, 3> trigger_seconds = {11 * 3600, 14 * 3600, 17 * 3600};
  int response_window_seconds = 9000;  // 2.5 h
  int aggregate_hit_threshold = 10;    // edges require strictly more hits
  double alpha = 0.05;
  double relevance_threshold = 0.001;
  int min_design_rows = 30;
  double level_share_floor = 0.10;
  bool population_sd = true;  // trait normalization divides by n

  Instant day_start(int day) const { return study_start + static_cast<Instant>(day - 1) * 86400; }

  Instant trigger_instant(int day, Period p) const {
    return day_start(day) + trigger_seconds[static_cast<int>(p)];
  }

  bool day_in_calendar(int day) const { return day >= 1 && day <= n_days; }

  bool instant_in_calendar(Instant t) const {
    return t >= study_start && t < study_start + static_cast<Instant>(n_days) * 86400;
  }

  // Day index containing the instant, or 0 when outside the calendar.
  int day_of(Instant t) const {
    if (!instant_in_calendar(t)) return 0;
    return static_cast<int>((t - study_start) / 86400) + 1;
  }

  const StateDef* find_state(const std::string& name) const {
    for (const auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }

  const StateDef* state_of_item(const std::string& item_code) const {
    for (const auto& s : states)
      for (const auto& it : s.items)
        if (it.code == item_code) return &s;
    return nullptr;
  }

  void validate() const {
    if (states.empty()) throw InputError("config: no states defined");
    for (const auto& s : states) {
      if (s.items.empty()) throw InputError("config: state '" + s.name + "' has no items");
      if (!(s.scale_max > s.scale_min))
        throw InputError("config: state '" + s.name + "' has an empty scale range");
    }
    if (n_days <= 0) throw InputError("config: n_days must be positive");
    if (response_window_seconds <= 0) throw InputError("config: response window must be positive");
    if (aggregate_hit_threshold < 0) throw InputError("config: hit threshold must be >= 0");
    if (!(alpha > 0 && alpha < 1)) throw InputError("config: alpha must be in (0,1)");
    if (relevance_threshold < 0) throw InputError("config: relevance threshold must be >= 0");
  }
};

// The study instrument layout: five TIPI pairs (standard + reverse-scored item,
// 7-point scale) and two PANAS scales (5-point scale).
inline StudyConfig default_config() {
  StudyConfig c;
  c.study_start = parse_rfc3339("2012-03-05T00:00:00Z").value();  // a Monday
  auto tipi = [](std::string name, std::string std_item, std::string rev_item) {
    StateDef s;
    s.name = name;
    s.trait = name;
    s.items = {{std::move(std_item), false}, {std::move(rev_item), true}};
    s.scale_min = 1;
    s.scale_max = 7;
    return s;
  };
  auto panas = [](std::string name, std::vector<std::string> codes) {
    StateDef s;
    s.name = name;
    s.trait = name;
    for (auto& code : codes) s.items.push_back({std::move(code), false});
    s.scale_min = 1;
    s.scale_max = 5;
    return s;
  };
  c.states = {
      tipi("extraversion", "tipi_extraverted", "tipi_reserved"),
      tipi("agreeableness", "tipi_sympathetic", "tipi_critical"),
      tipi("conscientiousness", "tipi_dependable", "tipi_disorganized"),
      tipi("emotional_stability", "tipi_calm", "tipi_anxious"),
      tipi("creativity", "tipi_open", "tipi_conventional"),
      panas("hpa", {"panas_enthusiastic", "panas_interested", "panas_active"}),
      panas("lna", {"panas_lonely", "panas_isolated"}),
      panas("hna", {"panas_sad", "panas_bored", "panas_sluggish"}),
      panas("lpa", {"panas_calm", "panas_relaxed"}),
  };
  return c;
}

inline nlohmann::json to_json(const StudyConfig& c) {
  nlohmann::json j;
  j["study_start"] = format_rfc3339(c.study_start);
  j["n_days"] = c.n_days;
  j["trigger_seconds"] = c.trigger_seconds;
  j["response_window_seconds"] = c.response_window_seconds;
  j["aggregate_hit_threshold"] = c.aggregate_hit_threshold;
  j["alpha"] = c.alpha;
  j["relevance_threshold"] = c.relevance_threshold;
  j["min_design_rows"] = c.min_design_rows;
  j["level_share_floor"] = c.level_share_floor;
  j["population_sd"] = c.population_sd;
  auto& states = j["states"] = nlohmann::json::array();
  for (const auto& s : c.states) {
    nlohmann::json sj;
    sj["name"] = s.name;
    sj["trait"] = s.trait;
    sj["scale_min"] = s.scale_min;
    sj["scale_max"] = s.scale_max;
    auto& items = sj["items"] = nlohmann::json::array();
    for (const auto& it : s.items) items.push_back({{"code", it.code}, {"reverse", it.reverse}});
    states.push_back(std::move(sj));
  }
  return j;
}

inline StudyConfig config_from_json(const nlohmann::json& j) {
  StudyConfig c = default_config();
  if (j.contains("study_start")) {
    auto t = parse_rfc3339(j.at("study_start").get<std::string>());
    if (!t) throw InputError("config: bad study_start timestamp");
    c.study_start = *t;
  }
  if (j.contains("n_days")) c.n_days = j.at("n_days").get<int>();
  if (j.contains("trigger_seconds")) {
    auto v = j.at("trigger_seconds").get<std::vector<int>>();
    if (v.size() != 3) throw InputError("config: trigger_seconds needs 3 entries");
    std::copy(v.begin(), v.end(), c.trigger_seconds.begin());
  }
  if (j.contains("response_window_seconds"))
    c.response_window_seconds = j.at("response_window_seconds").get<int>();
  if (j.contains("aggregate_hit_threshold"))
    c.aggregate_hit_threshold = j.at("aggregate_hit_threshold").get<int>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("relevance_threshold"))
    c.relevance_threshold = j.at("relevance_threshold").get<double>();
  if (j.contains("min_design_rows")) c.min_design_rows = j.at("min_design_rows").get<int>();
  if (j.contains("level_share_floor"))
    c.level_share_floor = j.at("level_share_floor").get<double>();
  if (j.contains("population_sd")) c.population_sd = j.at("population_sd").get<bool>();
  if (j.contains("states")) {
    c.states.clear();
    for (const auto& sj : j.at("states")) {
      StateDef s;
      s.name = sj.at("name").get<std::string>();
      s.trait = sj.value("trait", s.name);
      s.scale_min = sj.value("scale_min", 1.0);
      s.scale_max = sj.value("scale_max", 7.0);
      for (const auto& ij : sj.at("items"))
        s.items.push_back({ij.at("code").get<std::string>(), ij.value("reverse", false)});
      c.states.push_back(std::move(s));
    }
  }
  c.validate();
  return c;
}

}  // namespace sociodyn
