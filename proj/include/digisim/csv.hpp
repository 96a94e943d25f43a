#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace digisim::csv {

/// A parsed CSV file: header plus rows, each row tagged with its 1-based line number.
struct Table {
    std::vector<std::string> header;
    struct Row {
        std::size_t line = 0;
        std::vector<std::string> fields;
    };
    std::vector<Row> rows;

    /// Column index by name; throws SchemaError when absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

Table parse(std::string_view text, const std::string &source = "<memory>");
Table read_file(const std::filesystem::path &path);
std::string read_text(const std::filesystem::path &path);

/// Throws SchemaError unless `table.header` is exactly one of the accepted headers.
std::size_t require_header(const Table &table, const std::vector<std::vector<std::string>> &accepted,
                           const std::string &source);

std::int64_t parse_int(std::string_view field, const std::string &where);
double parse_double(std::string_view field, const std::string &where);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string join_row(const std::vector<std::string> &fields);

} // namespace digisim::csv
