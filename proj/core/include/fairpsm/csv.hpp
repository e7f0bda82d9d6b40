#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairpsm {

// In-memory CSV table: a header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // index of a header column, -1 when absent
    int column_index(const std::string& name) const;
};

// RFC 4180 reader: quoted fields, doubled quotes, embedded separators and
// newlines, optional CRLF line endings. Every row must have the header width.
CsvTable read_csv(const std::string& path, char delimiter = ',');
CsvTable parse_csv(std::istream& in, char delimiter = ',');

// Quotes a cell only when it contains the delimiter, a quote or a newline.
std::string csv_escape(const std::string& cell, char delimiter = ',');
void write_csv(std::ostream& out, const CsvTable& table, char delimiter = ',');

} // namespace fairpsm
