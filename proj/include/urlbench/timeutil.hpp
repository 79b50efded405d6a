#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace urlbench {

/// UTC timestamps are plain unix epoch seconds throughout.
using Timestamp = int64_t;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
  int hour;
  int minute;
  int second;
};

// Proleptic Gregorian day arithmetic, no locale, no DST.
int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_timestamp(Timestamp ts);
Timestamp timestamp_from_civil(const CivilDate& c);

/// Accepts "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z'.
std::optional<Timestamp> parse_iso8601(const std::string& s);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp ts);

/// Months since year 0 (UTC calendar month of the timestamp).
int64_t month_index(Timestamp ts);

/// "YYYY-MM" for report rows.
std::string format_month(int64_t month_idx);

/// Calendar-month subtraction with day-of-month clamping
/// (e.g. Mar 31 minus one month is Feb 28).
Timestamp subtract_months(Timestamp ts, int months);

}  // namespace urlbench
