#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace abcd::csv {

// Minimal RFC-4180-style table: comma separated, double quotes for cells
// containing commas/quotes/newlines, first row is the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
    std::size_t require_column(const std::string& name) const;  // SchemaError if absent
};

Table parse(const std::string& text);
Table read_file(const std::filesystem::path& path);

std::string to_string(const Table& table);
void write_file(const std::filesystem::path& path, const Table& table);

// Shortest decimal representation that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace abcd::csv
