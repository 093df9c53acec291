#include "abcd/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "abcd/errors.hpp"

namespace abcd::csv {

std::optional<std::size_t> Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::require_column(const std::string& name) const {
    auto idx = column(name);
    if (!idx) throw SchemaError("missing column '" + name + "'");
    return *idx;
}

namespace {

bool needs_quoting(const std::string& cell) {
    return cell.find_first_of(",\"\r\n") != std::string::npos;
}

void append_cell(std::string& out, const std::string& cell) {
    if (!needs_quoting(cell)) {
        out += cell;
        return;
    }
    out += '"';
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

}  // namespace

Table parse(const std::string& text) {
    Table table;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool row_started = false;
    bool have_header = false;

    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
    };
    auto end_row = [&] {
        end_cell();
        if (!have_header) {
            table.header = std::move(row);
            have_header = true;
        } else {
            if (row.size() != table.header.size()) {
                throw ParseError("row " + std::to_string(table.rows.size() + 1) +
                                 ": expected " + std::to_string(table.header.size()) +
                                 " cells, got " + std::to_string(row.size()));
            }
            table.rows.push_back(std::move(row));
        }
        row.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_cell();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                break;
            default:
                cell += c;
                row_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted cell");
    if (row_started || !cell.empty() || !row.empty()) end_row();
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string to_string(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        append_cell(out, table.header[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            append_cell(out, row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << to_string(table);
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace abcd::csv
