#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the line-oriented file formats.
namespace llcoach::text {

std::string_view trim(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

/// Splits on `sep` at parenthesis depth zero; pieces are trimmed, empty
/// pieces dropped.
std::vector<std::string> split_top_level(std::string_view s, char sep);

/// Whitespace tokenizer that keeps "double quoted" runs as one token
/// (quotes stripped). Returns false on an unterminated quote.
bool tokenize_quoted(std::string_view line, std::vector<std::string>& out);

bool is_upper_token(std::string_view s);  // [A-Z][A-Z0-9_]*
bool is_identifier(std::string_view s);   // [A-Za-z_][A-Za-z0-9_]*

/// Locale-independent strict double parse; the whole string must be consumed.
bool parse_double(std::string_view s, double& out);

/// Shortest round-trippable representation ("%.17g" trimmed to what is needed).
std::string format_double(double v);
/// Fixed-point formatting with `decimals` digits.
std::string format_fixed(double v, int decimals);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

}  // namespace llcoach::text
