#pragma once

#include <string>
#include <vector>

namespace singlab {

/// 17-significant-digit decimal text (round-trips doubles bit-exactly).
std::string format_number(double v);

/// RFC-4180 field quoting (quotes fields containing commas, quotes or
/// newlines, doubling embedded quotes).
std::string csv_escape(const std::string& field);

std::string csv_line(const std::vector<std::string>& fields);

/// Write a CSV: header then rows, CRLF-free line endings, deterministic.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace singlab
