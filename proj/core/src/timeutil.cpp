#include "vfp/timeutil.hpp"

#include <chrono>
#include <cstdio>

#include "vfp/common.hpp"

namespace vfp {

namespace {

namespace chr = std::chrono;

constexpr std::int64_t kHoursPerDay = 24;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

EpochDay days_from_civil(int y, int m, int d) {
  chr::year_month_day ymd{chr::year{y}, chr::month{unsigned(m)},
                          chr::day{unsigned(d)}};
  if (!ymd.ok()) throw DataError("invalid calendar date");
  return chr::sys_days{ymd}.time_since_epoch().count();
}

void civil_from_days(EpochDay days, int& y, int& m, int& d) {
  chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  y = int(ymd.year());
  m = int(unsigned(ymd.month()));
  d = int(unsigned(ymd.day()));
}

}  // namespace

Aggregation parse_aggregation(std::string_view s) {
  if (s == "hourly") return Aggregation::hourly;
  if (s == "daily") return Aggregation::daily;
  if (s == "monthly") return Aggregation::monthly;
  if (s == "annual") return Aggregation::annual;
  throw ConfigError("unknown aggregation level: " + std::string(s));
}

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::hourly: return "hourly";
    case Aggregation::daily: return "daily";
    case Aggregation::monthly: return "monthly";
    case Aggregation::annual: return "annual";
  }
  return "";
}

EpochHour parse_hour_utc(std::string_view s) {
  // Accepted: YYYY-MM-DDTHH:MM(:SS)? followed by Z or +00:00.
  std::string_view rest = s;
  std::string_view tz;
  if (!rest.empty() && rest.back() == 'Z') {
    tz = "Z";
    rest.remove_suffix(1);
  } else if (rest.size() > 6 &&
             (rest.substr(rest.size() - 6) == "+00:00")) {
    tz = "+00:00";
    rest.remove_suffix(6);
  } else {
    throw DataError("timezone-ambiguous timestamp (UTC designator required): " +
                    std::string(s));
  }
  if (rest.size() != 16 && rest.size() != 19)
    throw DataError("malformed timestamp: " + std::string(s));
  if (rest[4] != '-' || rest[7] != '-' || rest[10] != 'T' || rest[13] != ':')
    throw DataError("malformed timestamp: " + std::string(s));
  int year, month, day, hour, minute, second = 0;
  if (!parse_int(rest.substr(0, 4), year) ||
      !parse_int(rest.substr(5, 2), month) ||
      !parse_int(rest.substr(8, 2), day) ||
      !parse_int(rest.substr(11, 2), hour) ||
      !parse_int(rest.substr(14, 2), minute))
    throw DataError("malformed timestamp: " + std::string(s));
  if (rest.size() == 19) {
    if (rest[16] != ':' || !parse_int(rest.substr(17, 2), second))
      throw DataError("malformed timestamp: " + std::string(s));
  }
  if (hour > 23) throw DataError("malformed timestamp: " + std::string(s));
  if (minute != 0 || second != 0)
    throw DataError("timestamp not hour-aligned: " + std::string(s));
  EpochDay days = days_from_civil(year, month, day);
  return days * kHoursPerDay + hour;
}

std::string format_hour_utc(EpochHour h) {
  EpochDay days = h / kHoursPerDay;
  int hour = int(h % kHoursPerDay);
  if (hour < 0) {
    hour += 24;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", y, m, d, hour);
  return buf;
}

EpochDay parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw DataError("malformed date (want YYYY-MM-DD): " + std::string(s));
  int y, m, d;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
      !parse_int(s.substr(8, 2), d))
    throw DataError("malformed date (want YYYY-MM-DD): " + std::string(s));
  return days_from_civil(y, m, d);
}

std::string format_date(EpochDay day) {
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

Period period_of(EpochHour h, Aggregation level) {
  switch (level) {
    case Aggregation::hourly:
      return {level, h};
    case Aggregation::daily: {
      EpochDay d = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
      return {level, d};
    }
    case Aggregation::monthly: {
      int y, m, d;
      civil_from_days(h / kHoursPerDay, y, m, d);
      return {level, month_key(y, m)};
    }
    case Aggregation::annual: {
      int y, m, d;
      civil_from_days(h / kHoursPerDay, y, m, d);
      return {level, y};
    }
  }
  throw ConfigError("invalid aggregation");
}

EpochHour period_start_hour(const Period& p) {
  switch (p.level) {
    case Aggregation::hourly:
      return p.key;
    case Aggregation::daily:
      return p.key * kHoursPerDay;
    case Aggregation::monthly: {
      int y = int(p.key / 12);
      int m = int(p.key % 12) + 1;
      return days_from_civil(y, m, 1) * kHoursPerDay;
    }
    case Aggregation::annual:
      return days_from_civil(int(p.key), 1, 1) * kHoursPerDay;
  }
  throw ConfigError("invalid aggregation");
}

std::int64_t hours_in(const Period& p) {
  switch (p.level) {
    case Aggregation::hourly:
      return 1;
    case Aggregation::daily:
      return kHoursPerDay;
    case Aggregation::monthly: {
      Period next{p.level, p.key + 1};
      return period_start_hour(next) - period_start_hour(p);
    }
    case Aggregation::annual: {
      Period next{p.level, p.key + 1};
      return period_start_hour(next) - period_start_hour(p);
    }
  }
  throw ConfigError("invalid aggregation");
}

std::string period_label(const Period& p) {
  char buf[32];
  switch (p.level) {
    case Aggregation::hourly:
      return format_hour_utc(p.key);
    case Aggregation::daily:
      return format_date(p.key);
    case Aggregation::monthly:
      std::snprintf(buf, sizeof(buf), "%04d-%02d", int(p.key / 12),
                    int(p.key % 12) + 1);
      return buf;
    case Aggregation::annual:
      std::snprintf(buf, sizeof(buf), "%04d", int(p.key));
      return buf;
  }
  return "";
}

int year_of_hour(EpochHour h) {
  int y, m, d;
  civil_from_days(h / kHoursPerDay, y, m, d);
  return y;
}

int year_of_day(EpochDay day) {
  int y, m, d;
  civil_from_days(day, y, m, d);
  return y;
}

std::int64_t month_key(int year, int month) {
  return std::int64_t(year) * 12 + (month - 1);
}

Period year_period(int year) { return {Aggregation::annual, year}; }

}  // namespace vfp
