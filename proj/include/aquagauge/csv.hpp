#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aquagauge::csv {

using Row = std::vector<std::string>;

// Splits comma-separated text into records. Handles double-quoted fields
// (with "" escapes and embedded newlines), CRLF line endings and a leading
// UTF-8 BOM. Lines that are entirely empty are skipped.
std::vector<Row> parse(std::string_view text);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const Row& fields);

std::string_view trim(std::string_view s);

// Shortest text that parses back to exactly v.
std::string format_shortest(double v);
// printf-style "%.<digits>g" / "%.<digits>f".
std::string format_general(double v, int significant_digits = 17);
std::string format_fixed(double v, int decimals);

}  // namespace aquagauge::csv
