#include "urlbench/timeutil.hpp"

#include <cstdio>

namespace urlbench {

int64_t days_from_civil(int y, int m, int d) {
  // Howard Hinnant's algorithm, days since 1970-01-01.
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

static void civil_from_days(int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

CivilDate civil_from_timestamp(Timestamp ts) {
  int64_t days = ts / 86400;
  int64_t rem = ts % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  CivilDate c{};
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(rem / 3600);
  c.minute = static_cast<int>((rem % 3600) / 60);
  c.second = static_cast<int>(rem % 60);
  return c;
}

Timestamp timestamp_from_civil(const CivilDate& c) {
  return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 + c.minute * 60 +
         c.second;
}

static int days_in_month(int year, int month) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[month - 1];
}

std::optional<Timestamp> parse_iso8601(const std::string& s) {
  CivilDate c{};
  char tail = '\0';
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &c.year, &c.month, &c.day, &c.hour,
                      &c.minute, &c.second, &tail);
  bool full = (n == 6) || (n == 7 && tail == 'Z');
  if (!full) {
    c = CivilDate{};
    n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &c.year, &c.month, &c.day, &tail);
    if (n != 3) return std::nullopt;
    // reject e.g. "2022-09-01junk"
    if (s.size() != 10) return std::nullopt;
  } else {
    size_t expect = (n == 7) ? 20u : 19u;
    if (s.size() != expect) return std::nullopt;
  }
  if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > days_in_month(c.year, c.month))
    return std::nullopt;
  if (c.hour < 0 || c.hour > 23 || c.minute < 0 || c.minute > 59 || c.second < 0 || c.second > 60)
    return std::nullopt;
  return timestamp_from_civil(c);
}

std::string format_iso8601(Timestamp ts) {
  CivilDate c = civil_from_timestamp(ts);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  return buf;
}

int64_t month_index(Timestamp ts) {
  CivilDate c = civil_from_timestamp(ts);
  return static_cast<int64_t>(c.year) * 12 + (c.month - 1);
}

std::string format_month(int64_t month_idx) {
  int64_t y = month_idx / 12;
  int64_t m = month_idx % 12;
  if (m < 0) {
    m += 12;
    y -= 1;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04lld-%02lld", static_cast<long long>(y),
                static_cast<long long>(m + 1));
  return buf;
}

Timestamp subtract_months(Timestamp ts, int months) {
  CivilDate c = civil_from_timestamp(ts);
  int64_t idx = static_cast<int64_t>(c.year) * 12 + (c.month - 1) - months;
  int y = static_cast<int>(idx / 12);
  int m = static_cast<int>(idx % 12);
  if (m < 0) {
    m += 12;
    y -= 1;
  }
  m += 1;
  int d = c.day;
  int dim = days_in_month(y, m);
  if (d > dim) d = dim;
  CivilDate out{y, m, d, c.hour, c.minute, c.second};
  return timestamp_from_civil(out);
}

}  // namespace urlbench
