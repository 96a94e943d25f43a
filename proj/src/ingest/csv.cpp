#include "digisim/csv.hpp"
#include "digisim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace digisim::csv {

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::size_t Table::column(std::string_view name) const {
    auto idx = find_column(name);
    if (!idx) {
        throw Error(ErrorKind::SchemaError, "missing column '" + std::string{name} + "'");
    }
    return *idx;
}

namespace {

std::vector<std::string> split_line(std::string_view line, const std::string &where) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    if (quoted) {
        throw Error(ErrorKind::SchemaError, where + ": unterminated quote");
    }
    out.push_back(std::move(field));
    return out;
}

} // namespace

Table parse(std::string_view text, const std::string &source) {
    Table table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        pos = 3;
    }
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            if (end >= text.size()) {
                break;
            }
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        auto fields = split_line(line, where);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != table.header.size()) {
                throw Error(ErrorKind::SchemaError, where + ": expected " +
                                                        std::to_string(table.header.size()) +
                                                        " fields, got " +
                                                        std::to_string(fields.size()));
            }
            table.rows.push_back({line_no, std::move(fields)});
        }
        if (end >= text.size()) {
            break;
        }
    }
    if (!have_header) {
        throw Error(ErrorKind::SchemaError, source + ": missing header row");
    }
    return table;
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Table read_file(const std::filesystem::path &path) {
    return parse(read_text(path), path.filename().string());
}

std::size_t require_header(const Table &table, const std::vector<std::vector<std::string>> &accepted,
                           const std::string &source) {
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        if (table.header == accepted[i]) {
            return i;
        }
    }
    std::string got;
    for (const auto &h : table.header) {
        got += (got.empty() ? "" : ",") + h;
    }
    std::string want;
    for (const auto &h : accepted.front()) {
        want += (want.empty() ? "" : ",") + h;
    }
    throw Error(ErrorKind::SchemaError, source + ": unexpected header '" + got + "' (expected '" +
                                            want + "')");
}

std::int64_t parse_int(std::string_view field, const std::string &where) {
    std::int64_t v = 0;
    const auto *first = field.data();
    const auto *last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw Error(ErrorKind::SchemaError, where + ": not an integer '" + std::string{field} + "'");
    }
    return v;
}

double parse_double(std::string_view field, const std::string &where) {
    double v = 0;
    const auto *first = field.data();
    const auto *last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || field.empty() || !std::isfinite(v)) {
        throw Error(ErrorKind::SchemaError, where + ": not a number '" + std::string{field} + "'");
    }
    return v;
}

std::string format_double(double v) {
    if (v == 0) {
        return "0";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string join_row(const std::vector<std::string> &fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        const auto &f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out.push_back('"');
            for (char ch : f) {
                if (ch == '"') {
                    out.push_back('"');
                }
                out.push_back(ch);
            }
            out.push_back('"');
        } else {
            out += f;
        }
    }
    return out;
}

} // namespace digisim::csv
