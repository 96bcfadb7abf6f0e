#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file formats: CSV fields, ISO-8601
// timestamps and digests.
namespace ose::text {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);

std::string join_csv(const std::vector<std::string>& fields);

/// Seconds since 1970-01-01T00:00:00Z as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(std::int64_t seconds);

/// Inverse of format_iso8601; also accepts a bare integer. Throws InvalidParams.
std::int64_t parse_iso8601(std::string_view text);

std::string lowercase(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace ose::text
