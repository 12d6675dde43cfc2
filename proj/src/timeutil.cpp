#include "botlab/timeutil.hpp"

#include <cstdio>

#include "botlab/error.hpp"

namespace botlab {
namespace {

// Howard Hinnant's civil-calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m,
                     unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  unsigned digits(std::size_t n) {
    unsigned v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos_ >= s_.size() || s_[pos_] < '0' || s_[pos_] > '9') fail();
      v = v * 10 + static_cast<unsigned>(s_[pos_++] - '0');
    }
    return v;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail();
    ++pos_;
  }

  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool at_digit() const {
    return pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9';
  }

  bool done() const { return pos_ == s_.size(); }

  [[noreturn]] void fail() const {
    throw ValidationError("malformed timestamp '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Timestamp from_civil(int year, unsigned month, unsigned day, unsigned hour,
                     unsigned minute, unsigned second) {
  return Timestamp{days_from_civil(year, month, day) * kSecondsPerDay +
                   hour * 3600 + minute * 60 + second};
}

Timestamp parse_timestamp(std::string_view text) {
  Cursor c(text);
  const unsigned year = c.digits(4);
  c.expect('-');
  const unsigned month = c.digits(2);
  c.expect('-');
  const unsigned day = c.digits(2);
  if (!c.accept('T') && !c.accept('t') && !c.accept(' ')) c.fail();
  const unsigned hour = c.digits(2);
  c.expect(':');
  const unsigned minute = c.digits(2);
  c.expect(':');
  const unsigned second = c.digits(2);
  if (c.accept('.')) {
    if (!c.at_digit()) c.fail();
    while (c.at_digit()) c.digits(1);
  }
  std::int64_t offset = 0;
  if (c.accept('Z') || c.accept('z')) {
  } else {
    int sign = 0;
    if (c.accept('+')) sign = 1;
    else if (c.accept('-')) sign = -1;
    else c.fail();
    const unsigned oh = c.digits(2);
    c.expect(':');
    const unsigned om = c.digits(2);
    if (oh > 23 || om > 59) c.fail();
    offset = sign * static_cast<std::int64_t>(oh * 3600 + om * 60);
  }
  if (!c.done()) c.fail();
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
      hour > 23 || minute > 59 || second > 60) {
    c.fail();
  }
  // leap seconds collapse onto the following second
  Timestamp t = from_civil(static_cast<int>(year), month, day, hour, minute,
                           second);
  t.seconds -= offset;
  return t;
}

std::string format_timestamp(Timestamp t) {
  const std::int64_t days = floor_div(t.seconds, kSecondsPerDay);
  const std::int64_t rem = t.seconds - days * kSecondsPerDay;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

Timestamp utc_day_start(Timestamp t) {
  return Timestamp{floor_div(t.seconds, kSecondsPerDay) * kSecondsPerDay};
}

int utc_hour(Timestamp t) {
  const std::int64_t rem = t.seconds - utc_day_start(t).seconds;
  return static_cast<int>(rem / 3600);
}

}  // namespace botlab
