#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vfp {

/// Hours since 1970-01-01T00:00Z. All timestamps in this project are UTC and
/// hour-aligned; files must carry an explicit UTC designator.
using EpochHour = std::int64_t;
using EpochDay = std::int64_t;

enum class Aggregation { hourly, daily, monthly, annual };

Aggregation parse_aggregation(std::string_view s);
std::string_view aggregation_name(Aggregation a);

/// Aggregation window identifier. Keys are comparable within one level:
/// hourly = epoch hour, daily = epoch day, monthly = year*12 + (month-1),
/// annual = year.
struct Period {
  Aggregation level;
  std::int64_t key;

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period&, const Period&) = default;
};

/// Parses "YYYY-MM-DDTHH:MM[:SS]" with a mandatory "Z" or "+00:00" suffix.
/// Throws DataError when the designator is missing or non-UTC
/// (timezone-ambiguous input is not repaired) or when the timestamp is not
/// hour-aligned.
EpochHour parse_hour_utc(std::string_view s);

std::string format_hour_utc(EpochHour h);

/// Parses "YYYY-MM-DD" into the epoch day.
EpochDay parse_date(std::string_view s);
std::string format_date(EpochDay d);

Period period_of(EpochHour h, Aggregation level);
std::int64_t hours_in(const Period& p);
EpochHour period_start_hour(const Period& p);
std::string period_label(const Period& p);

int year_of_hour(EpochHour h);
int year_of_day(EpochDay d);
std::int64_t month_key(int year, int month);  // month in 1..12
Period year_period(int year);

}  // namespace vfp
