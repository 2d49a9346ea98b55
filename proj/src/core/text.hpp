#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aist {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string lower(std::string_view s);

// Strict numeric parsing: whole token must convert.
std::optional<int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Civil (naive local) timestamp. Accepts "YYYY-MM-DD HH:MM:SS" and the
// ISO-8601 'T' separator; seconds optional.
struct CivilTime {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
};

std::optional<CivilTime> parse_civil(std::string_view s);
std::string format_civil(const CivilTime& t);

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
int64_t days_from_civil(int year, int month, int day);
bool civil_valid(const CivilTime& t);

// Seconds since epoch for a naive civil time (no time zones anywhere).
int64_t civil_to_seconds(const CivilTime& t);
CivilTime civil_from_seconds(int64_t seconds);  // inverse of civil_to_seconds

// Minimal CSV: handles quoted fields with embedded commas/quotes, no
// embedded newlines (none of our sources produce them).
std::vector<std::string> csv_fields(std::string_view line);
std::string csv_escape(std::string_view field);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Fixed, locale-independent float formatting for CSV artifacts.
std::string format_double(double v);

}  // namespace aist
