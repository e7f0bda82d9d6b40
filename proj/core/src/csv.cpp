#include "fairpsm/csv.hpp"

#include <fstream>
#include <sstream>

#include "fairpsm/errors.hpp"

namespace fairpsm {

int CsvTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

// One record, possibly spanning several physical lines when quoted.
// Returns false on clean EOF before any character of a new record.
bool parse_record(std::istream& in, char delimiter, std::vector<std::string>& out) {
    out.clear();
    std::string cell;
    bool in_quotes = false;
    bool seen_any = false;
    int c;
    while ((c = in.get()) != EOF) {
        seen_any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    cell.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && cell.empty()) {
            in_quotes = true;
        } else if (ch == delimiter) {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            out.push_back(std::move(cell));
            return true;
        } else if (ch == '\n') {
            out.push_back(std::move(cell));
            return true;
        } else {
            cell.push_back(ch);
        }
    }
    if (!seen_any) return false;
    out.push_back(std::move(cell));
    return true;
}

} // namespace

CsvTable parse_csv(std::istream& in, char delimiter) {
    CsvTable table;
    std::vector<std::string> record;
    if (!parse_record(in, delimiter, record)) {
        throw InputError("csv: empty input, expected a header row");
    }
    table.header = record;
    size_t line = 1;
    while (parse_record(in, delimiter, record)) {
        ++line;
        if (record.size() == 1 && record[0].empty()) continue; // trailing blank line
        if (record.size() != table.header.size()) {
            throw InputError("csv: row " + std::to_string(line) + " has " +
                             std::to_string(record.size()) + " fields, header has " +
                             std::to_string(table.header.size()));
        }
        table.rows.push_back(record);
    }
    return table;
}

CsvTable read_csv(const std::string& path, char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open CSV file: " + path);
    return parse_csv(in, delimiter);
}

std::string csv_escape(const std::string& cell, char delimiter) {
    bool needs_quotes = false;
    for (char ch : cell) {
        if (ch == delimiter || ch == '"' || ch == '\n' || ch == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return cell;
    std::string quoted = "\"";
    for (char ch : cell) {
        if (ch == '"') quoted += "\"\"";
        else quoted.push_back(ch);
    }
    quoted.push_back('"');
    return quoted;
}

void write_csv(std::ostream& out, const CsvTable& table, char delimiter) {
    auto write_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out.put(delimiter);
            out << csv_escape(row[i], delimiter);
        }
        out.put('\n');
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
}

} // namespace fairpsm
