#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sociodyn {

// ---------------------------------------------------------------------------
// Core enums
// ---------------------------------------------------------------------------

enum class Level : int { L = 0, N = 1, H = 2 };
enum class Period : int { Morning = 0, Midday = 1, Afternoon = 2 };
enum class Slot : int { MorningToMidday = 0, MiddayToAfternoon = 1 };
enum class Wave : int { Begin = 0, End = 1 };

inline const char* to_string(Level l) {
  switch (l) {
    case Level::L: return "L";
    case Level::N: return "N";
    default: return "H";
  }
}

inline const char* to_string(Period p) {
  switch (p) {
    case Period::Morning: return "Morning";
    case Period::Midday: return "Midday";
    default: return "Afternoon";
  }
}

inline const char* to_string(Slot s) {
  return s == Slot::MorningToMidday ? "MorningToMidday" : "MiddayToAfternoon";
}

inline const char* to_string(Wave w) { return w == Wave::Begin ? "Begin" : "End"; }

inline std::optional<Level> level_from_string(std::string_view s) {
  if (s == "L") return Level::L;
  if (s == "N") return Level::N;
  if (s == "H") return Level::H;
  return std::nullopt;
}

inline std::optional<Period> period_from_string(std::string_view s) {
  if (s == "Morning") return Period::Morning;
  if (s == "Midday") return Period::Midday;
  if (s == "Afternoon") return Period::Afternoon;
  return std::nullopt;
}

inline std::optional<Wave> wave_from_string(std::string_view s) {
  if (s == "Begin") return Wave::Begin;
  if (s == "End") return Wave::End;
  return std::nullopt;
}

constexpr std::array<Level, 3> all_levels() { return {Level::L, Level::N, Level::H}; }

// Periods bounding a slot: the start survey and the end (target) survey.
inline Period slot_start(Slot s) {
  return s == Slot::MorningToMidday ? Period::Morning : Period::Midday;
}
inline Period slot_end(Slot s) {
  return s == Slot::MorningToMidday ? Period::Midday : Period::Afternoon;
}
// Period dummy of the transition targeting the slot's end survey:
// 0 for midday targets, 1 for afternoon targets.
inline int slot_period_dummy(Slot s) { return s == Slot::MorningToMidday ? 0 : 1; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : Error {
  using Error::Error;
};
struct CorpusQualityError : InputError {
  using InputError::InputError;
};
struct DegenerateDistribution : Error {
  double constant_value;
  explicit DegenerateDistribution(double v)
      : Error("degenerate score distribution: all values equal " + std::to_string(v)),
        constant_value(v) {}
};
struct ZeroTraitVariance : Error {
  std::string trait;
  explicit ZeroTraitVariance(std::string t)
      : Error("trait '" + t + "' has zero variance in the begin-wave cohort"), trait(std::move(t)) {}
};
struct RankDeficient : Error {
  using Error::Error;
};
struct NonConvergence : Error {
  using Error::Error;
};
struct CompleteSeparation : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Logging (stderr, controlled by SOCIODYN_LOG: off|warn|info|debug)
// ---------------------------------------------------------------------------

enum class LogLevel : int { Off = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* env = std::getenv("SOCIODYN_LOG");
    if (!env) return LogLevel::Warn;
    std::string_view v(env);
    if (v == "off") return LogLevel::Off;
    if (v == "warn") return LogLevel::Warn;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return lvl;
}

inline void log(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(log_level())) {
    const char* tag = lvl == LogLevel::Warn ? "warn" : lvl == LogLevel::Info ? "info" : "debug";
    std::fprintf(stderr, "[sociodyn %s] %s\n", tag, msg.c_str());
  }
}

inline void log_warn(const std::string& msg) { log(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }

// ---------------------------------------------------------------------------
// Number formatting: locale-independent, stable across runs.
// ---------------------------------------------------------------------------

inline std::string fmt_num(double v, int precision = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  std::string tmp(s);
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  if (std::isnan(v) || std::isinf(v)) return std::nullopt;
  return v;
}

inline std::optional<long> parse_long(std::string_view s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  std::string tmp(s);
  long v = std::strtol(tmp.c_str(), &end, 10);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Time: UTC instants at second resolution, RFC-3339 text form.
// ---------------------------------------------------------------------------

using Instant = std::int64_t;  // seconds since the Unix epoch, UTC

// Days from civil date (proleptic Gregorian), Howard Hinnant's algorithm.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

// Accepts YYYY-MM-DDTHH:MM:SSZ (also "+00:00" suffix and a space separator).
inline std::optional<Instant> parse_rfc3339(std::string_view s) {
  auto digit = [&](size_t i) -> int {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return -1;
    return s[i] - '0';
  };
  auto num2 = [&](size_t i) -> int {
    int a = digit(i), b = digit(i + 1);
    return (a < 0 || b < 0) ? -1 : a * 10 + b;
  };
  if (s.size() < 19) return std::nullopt;
  int y = 0;
  for (int i = 0; i < 4; ++i) {
    int d = digit(i);
    if (d < 0) return std::nullopt;
    y = y * 10 + d;
  }
  if (s[4] != '-' || s[7] != '-') return std::nullopt;
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  if (s[13] != ':' || s[16] != ':') return std::nullopt;
  int mo = num2(5), da = num2(8), hh = num2(11), mi = num2(14), se = num2(17);
  if (mo < 1 || mo > 12 || da < 1 || da > 31 || hh > 23 || mi > 59 || se > 60) return std::nullopt;
  if (mo < 0 || da < 0 || hh < 0 || mi < 0 || se < 0) return std::nullopt;
  std::string_view rest = s.substr(19);
  if (!(rest == "Z" || rest == "z" || rest == "+00:00" || rest == "-00:00" || rest == "+0000"))
    return std::nullopt;
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(da)) * 86400 +
         hh * 3600 + mi * 60 + se;
}

inline std::string format_rfc3339(Instant t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                static_cast<long long>(sod / 3600), static_cast<long long>((sod % 3600) / 60),
                static_cast<long long>(sod % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Atomic file write: temp file + rename, so readers never see partial output.
// ---------------------------------------------------------------------------

inline void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Content digest (FNV-1a, 64-bit). Identification only, not cryptographic.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string digest_hex(std::string_view data) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(data)));
  return buf;
}

}  // namespace sociodyn
