#pragma once

#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sociodyn/common.hpp"
#include "sociodyn/config.hpp"
#include "sociodyn/csv.hpp"

namespace sociodyn {

// ---------------------------------------------------------------------------
// Domain records
// ---------------------------------------------------------------------------

// One directed infrared detection: ego's sensor saw alter.
struct IrEvent {
  std::string ego_id;
  std::string alter_id;
  Instant timestamp = 0;

  friend bool operator==(const IrEvent&, const IrEvent&) = default;
};

// One participant's item answers for one (day, period) sampling slot.
struct SurveyResponse {
  std::string participant_id;
  int day = 0;
  Period period = Period::Morning;
  std::map<std::string, double> items;  // item code -> response
  Instant submitted_at = 0;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

struct TraitSurvey {
  std::string participant_id;
  Wave wave = Wave::Begin;
  std::map<std::string, double> raw_trait_scores;  // trait name -> raw score

  friend bool operator==(const TraitSurvey&, const TraitSurvey&) = default;
};

struct CorpusStats {
  long n_participants = 0;
  long n_surveys = 0;
  long n_ir_hits = 0;
  long n_transient_edges = 0;
  long n_absences = 0;
};

// ---------------------------------------------------------------------------
// Parse accounting. Malformed rows count toward the corpus-quality abort;
// Excluded rows are rule-based exclusions kept for the audit trail.
// ---------------------------------------------------------------------------

enum class RejectKind { Malformed, Excluded };

struct RejectRow {
  std::string source;  // "ir", "surveys", "traits"
  size_t line = 0;     // 1-based data row number
  RejectKind kind = RejectKind::Malformed;
  std::string reason;
  std::string content;
};

template <typename T>
struct ParseOutcome {
  std::vector<T> records;
  std::vector<RejectRow> rejects;
  std::vector<std::string> warnings;
  size_t input_rows = 0;

  size_t malformed() const {
    size_t n = 0;
    for (const auto& r : rejects)
      if (r.kind == RejectKind::Malformed) ++n;
    return n;
  }
};

struct Corpus {
  std::vector<IrEvent> events;
  std::vector<SurveyResponse> surveys;
  std::vector<TraitSurvey> traits;
  std::vector<RejectRow> rejects;
  std::vector<std::string> warnings;
};

namespace detail {

constexpr double kMaxMalformedShare = 0.10;

inline void check_quality(const char* source, size_t malformed, size_t total) {
  if (total > 0 && static_cast<double>(malformed) > kMaxMalformedShare * static_cast<double>(total))
    throw CorpusQualityError(std::string(source) + ": " + std::to_string(malformed) + " of " +
                             std::to_string(total) + " rows malformed (over 10%)");
}

// Reads either CSV with the given header or line-delimited JSON objects whose
// keys match the header names. Returns rows as string fields in header order.
struct RowSource {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string json_field_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt_num(v.get<double>(), 17);
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

inline RowSource read_rows(std::istream& in, const std::vector<std::string>& expected_header,
                           const char* source) {
  // Peek past whitespace: '{' means line-delimited JSON records.
  int c;
  while ((c = in.peek()) != EOF && (c == ' ' || c == '\n' || c == '\r' || c == '\t')) in.get();
  if (c == EOF) throw InputError(std::string(source) + ": empty input");
  RowSource out;
  out.header = expected_header;
  if (c == '{') {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      std::vector<std::string> row;
      if (j.is_discarded() || !j.is_object()) {
        // Preserve the row so it can be rejected downstream with its content.
        row.assign(expected_header.size(), "");
        row[0] = line;
        out.rows.push_back(std::move(row));
        continue;
      }
      for (const auto& name : expected_header)
        row.push_back(j.contains(name) ? json_field_to_string(j.at(name)) : "");
      out.rows.push_back(std::move(row));
    }
    return out;
  }
  csv::Table t = csv::read(in);
  if (t.header != expected_header) {
    std::string want;
    for (size_t i = 0; i < expected_header.size(); ++i)
      want += (i ? "," : "") + expected_header[i];
    throw InputError(std::string(source) + ": header mismatch, expected '" + want + "'");
  }
  out.rows = std::move(t.rows);
  return out;
}

inline std::string row_text(const std::vector<std::string>& row) {
  return csv::join_row(row);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& ir_header() {
  static const std::vector<std::string> h = {"ego_id", "alter_id", "timestamp_utc"};
  return h;
}

inline const std::vector<std::string>& survey_header() {
  static const std::vector<std::string> h = {"participant_id", "day",       "period",
                                             "submitted_at_utc", "item_code", "value"};
  return h;
}

inline const std::vector<std::string>& trait_header() {
  static const std::vector<std::string> h = {"participant_id", "wave", "trait", "raw_score"};
  return h;
}

inline ParseOutcome<IrEvent> parse_ir_log(std::istream& in, const StudyConfig& config) {
  auto src = detail::read_rows(in, ir_header(), "ir");
  ParseOutcome<IrEvent> out;
  out.input_rows = src.rows.size();
  for (size_t i = 0; i < src.rows.size(); ++i) {
    const auto& row = src.rows[i];
    auto reject = [&](const std::string& reason) {
      out.rejects.push_back({"ir", i + 1, RejectKind::Malformed, reason, detail::row_text(row)});
    };
    if (row.size() != 3) {
      reject("expected 3 fields");
      continue;
    }
    if (row[0].empty() || row[1].empty()) {
      reject("empty participant id");
      continue;
    }
    if (row[0] == row[1]) {
      reject("ego equals alter");
      continue;
    }
    auto ts = parse_rfc3339(row[2]);
    if (!ts) {
      reject("bad timestamp '" + row[2] + "'");
      continue;
    }
    if (!config.instant_in_calendar(*ts)) {
      reject("timestamp outside study calendar");
      continue;
    }
    out.records.push_back({row[0], row[1], *ts});
  }
  detail::check_quality("ir", out.malformed(), out.input_rows);
  std::stable_sort(out.records.begin(), out.records.end(), [](const IrEvent& a, const IrEvent& b) {
    return std::tie(a.timestamp, a.ego_id, a.alter_id) < std::tie(b.timestamp, b.ego_id, b.alter_id);
  });
  return out;
}

inline ParseOutcome<SurveyResponse> parse_surveys(std::istream& in, const StudyConfig& config) {
  auto src = detail::read_rows(in, survey_header(), "surveys");
  ParseOutcome<SurveyResponse> out;
  out.input_rows = src.rows.size();

  struct Submission {
    SurveyResponse response;
    std::vector<size_t> row_lines;  // contributing data rows (for exclusion accounting)
    std::vector<std::string> row_texts;
  };
  // key: (participant, day, period, submitted_at)
  std::map<std::tuple<std::string, int, int, Instant>, Submission> submissions;

  for (size_t i = 0; i < src.rows.size(); ++i) {
    const auto& row = src.rows[i];
    auto reject = [&](const std::string& reason) {
      out.rejects.push_back(
          {"surveys", i + 1, RejectKind::Malformed, reason, detail::row_text(row)});
    };
    if (row.size() != 6) {
      reject("expected 6 fields");
      continue;
    }
    if (row[0].empty()) {
      reject("empty participant id");
      continue;
    }
    auto day = parse_long(row[1]);
    if (!day || !config.day_in_calendar(static_cast<int>(*day))) {
      reject("day '" + row[1] + "' outside study calendar");
      continue;
    }
    auto period = period_from_string(row[2]);
    if (!period) {
      reject("bad period '" + row[2] + "'");
      continue;
    }
    auto submitted = parse_rfc3339(row[3]);
    if (!submitted) {
      reject("bad timestamp '" + row[3] + "'");
      continue;
    }
    const StateDef* state = config.state_of_item(row[4]);
    if (!state) {
      reject("unknown item code '" + row[4] + "'");
      continue;
    }
    auto value = parse_double(row[5]);
    if (!value) {
      reject("bad value '" + row[5] + "'");
      continue;
    }
    if (*value < state->scale_min || *value > state->scale_max) {
      reject("value " + row[5] + " outside scale [" + fmt_num(state->scale_min) + "," +
             fmt_num(state->scale_max) + "] of item '" + row[4] + "'");
      continue;
    }
    Instant trigger = config.trigger_instant(static_cast<int>(*day), *period);
    if (*submitted < trigger || *submitted > trigger + config.response_window_seconds) {
      out.rejects.push_back({"surveys", i + 1, RejectKind::Excluded,
                             "submitted outside the response window", detail::row_text(row)});
      continue;
    }
    auto key = std::make_tuple(row[0], static_cast<int>(*day), static_cast<int>(*period),
                               *submitted);
    auto& sub = submissions[key];
    if (sub.row_lines.empty()) {
      sub.response.participant_id = row[0];
      sub.response.day = static_cast<int>(*day);
      sub.response.period = *period;
      sub.response.submitted_at = *submitted;
    }
    if (sub.response.items.count(row[4])) {
      out.rejects.push_back({"surveys", i + 1, RejectKind::Excluded,
                             "duplicate item '" + row[4] + "' in one submission",
                             detail::row_text(row)});
      continue;
    }
    sub.response.items[row[4]] = *value;
    sub.row_lines.push_back(i + 1);
    sub.row_texts.push_back(detail::row_text(row));
  }

  // Duplicate (participant, day, period): keep the earliest submission.
  std::map<std::tuple<std::string, int, int>, const Submission*> earliest;
  for (const auto& [key, sub] : submissions) {
    auto slot = std::make_tuple(std::get<0>(key), std::get<1>(key), std::get<2>(key));
    auto it = earliest.find(slot);
    if (it == earliest.end() || sub.response.submitted_at < it->second->response.submitted_at)
      earliest.insert_or_assign(slot, &sub);
  }
  for (const auto& [key, sub] : submissions) {
    auto slot = std::make_tuple(std::get<0>(key), std::get<1>(key), std::get<2>(key));
    if (earliest.at(slot) != &sub) {
      out.warnings.push_back("duplicate survey for " + std::get<0>(key) + " day " +
                             std::to_string(std::get<1>(key)) + " " +
                             to_string(static_cast<Period>(std::get<2>(key))) +
                             ": kept the earliest submission");
      for (size_t r = 0; r < sub.row_lines.size(); ++r)
        out.rejects.push_back({"surveys", sub.row_lines[r], RejectKind::Excluded,
                               "later duplicate submission", sub.row_texts[r]});
    }
  }
  for (const auto& [slot, sub] : earliest) out.records.push_back(sub->response);
  detail::check_quality("surveys", out.malformed(), out.input_rows);
  std::sort(out.records.begin(), out.records.end(),
            [](const SurveyResponse& a, const SurveyResponse& b) {
              return std::tie(a.participant_id, a.day, a.period) <
                     std::tie(b.participant_id, b.day, b.period);
            });
  return out;
}

inline ParseOutcome<TraitSurvey> parse_traits(std::istream& in, const StudyConfig& config) {
  auto src = detail::read_rows(in, trait_header(), "traits");
  ParseOutcome<TraitSurvey> out;
  out.input_rows = src.rows.size();
  std::map<std::pair<std::string, int>, TraitSurvey> grouped;
  for (size_t i = 0; i < src.rows.size(); ++i) {
    const auto& row = src.rows[i];
    auto reject = [&](const std::string& reason) {
      out.rejects.push_back(
          {"traits", i + 1, RejectKind::Malformed, reason, detail::row_text(row)});
    };
    if (row.size() != 4) {
      reject("expected 4 fields");
      continue;
    }
    if (row[0].empty() || row[2].empty()) {
      reject("empty participant or trait name");
      continue;
    }
    auto wave = wave_from_string(row[1]);
    if (!wave) {
      reject("bad wave '" + row[1] + "'");
      continue;
    }
    auto score = parse_double(row[3]);
    if (!score) {
      reject("bad raw score '" + row[3] + "'");
      continue;
    }
    auto& t = grouped[{row[0], static_cast<int>(*wave)}];
    if (t.raw_trait_scores.count(row[2])) {
      out.rejects.push_back({"traits", i + 1, RejectKind::Excluded,
                             "duplicate trait '" + row[2] + "'", detail::row_text(row)});
      continue;
    }
    t.participant_id = row[0];
    t.wave = *wave;
    t.raw_trait_scores[row[2]] = *score;
  }
  detail::check_quality("traits", out.malformed(), out.input_rows);
  std::set<std::string> in_scope;
  for (const auto& s : config.states) in_scope.insert(s.trait);
  for (auto& [key, t] : grouped) {
    if (t.wave == Wave::Begin) {
      for (const auto& name : in_scope)
        if (!t.raw_trait_scores.count(name))
          out.warnings.push_back("participant " + t.participant_id +
                                 " begin-wave traits missing '" + name + "'");
    }
    out.records.push_back(std::move(t));
  }
  std::sort(out.records.begin(), out.records.end(), [](const TraitSurvey& a, const TraitSurvey& b) {
    return std::tie(a.participant_id, a.wave) < std::tie(b.participant_id, b.wave);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Serialization (normalized order, byte-stable)
// ---------------------------------------------------------------------------

inline std::string serialize_ir(const std::vector<IrEvent>& events) {
  std::string out = "ego_id,alter_id,timestamp_utc\n";
  for (const auto& e : events)
    out += csv::join_row({e.ego_id, e.alter_id, format_rfc3339(e.timestamp)}) + "\n";
  return out;
}

inline std::string serialize_surveys(const std::vector<SurveyResponse>& surveys) {
  std::string out = "participant_id,day,period,submitted_at_utc,item_code,value\n";
  for (const auto& s : surveys)
    for (const auto& [code, value] : s.items)
      out += csv::join_row({s.participant_id, std::to_string(s.day), to_string(s.period),
                            format_rfc3339(s.submitted_at), code, fmt_num(value, 12)}) +
             "\n";
  return out;
}

inline std::string serialize_traits(const std::vector<TraitSurvey>& traits) {
  std::string out = "participant_id,wave,trait,raw_score\n";
  for (const auto& t : traits)
    for (const auto& [name, score] : t.raw_trait_scores)
      out += csv::join_row({t.participant_id, to_string(t.wave), name, fmt_num(score, 12)}) + "\n";
  return out;
}

inline std::string serialize_rejects(const std::vector<RejectRow>& rejects) {
  std::string out = "source,line,kind,reason,content\n";
  for (const auto& r : rejects)
    out += csv::join_row({r.source, std::to_string(r.line),
                          r.kind == RejectKind::Malformed ? "malformed" : "excluded", r.reason,
                          r.content}) +
           "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Corpus-level helpers
// ---------------------------------------------------------------------------

// Participants eligible for window/transition analysis: anyone with an
// accepted survey or trait record. IR-only ids are outside the closed cohort.
inline std::set<std::string> survey_roster(const Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& s : corpus.surveys) ids.insert(s.participant_id);
  for (const auto& t : corpus.traits) ids.insert(t.participant_id);
  return ids;
}

}  // namespace sociodyn
