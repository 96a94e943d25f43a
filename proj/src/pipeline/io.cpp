#include "digisim/csv.hpp"
#include "digisim/error.hpp"
#include "digisim/pipeline.hpp"
#include "json.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

namespace digisim::pipeline {

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
    case Stage::Ingest:
        return "ingest";
    case Stage::Gapfill:
        return "gapfill";
    case Stage::Ipf:
        return "ipf";
    case Stage::GenFarms:
        return "genfarms";
    case Stage::Assign:
        return "assign";
    case Stage::Validate:
        return "validate";
    case Stage::Risk:
        return "risk";
    }
    return "unknown";
}

const std::vector<Stage> &all_stages() {
    static const std::vector<Stage> stages{Stage::Ingest,   Stage::Gapfill,  Stage::Ipf, Stage::GenFarms,
                                           Stage::Assign,   Stage::Validate, Stage::Risk};
    return stages;
}

std::vector<Stage> stages_for(std::string_view subcommand) {
    if (subcommand == "all") {
        return all_stages();
    }
    if (subcommand == "gapfill") {
        return {Stage::Gapfill, Stage::Ipf};
    }
    for (auto s : all_stages()) {
        if (to_string(s) == subcommand) {
            return {s};
        }
    }
    throw Error(ErrorKind::ConfigError, "unknown subcommand '" + std::string(subcommand) + "'");
}

void Logger::log(std::string_view level, std::string_view stage, std::string_view message,
                 const std::map<std::string, std::string> &fields) {
    if (quiet_) {
        return;
    }
    nlohmann::json j;
    j["level"] = level;
    j["stage"] = stage;
    j["msg"] = message;
    for (const auto &[k, v] : fields) {
        j[k] = v;
    }
    const std::lock_guard lock(mutex_);
    std::cerr << j.dump() << '\n';
}

void write_atomic(const fs::path &path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot rename onto " + path.string());
    }
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(1, threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(m);
                    if (!first) {
                        first = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

std::string write_farms(const std::vector<FarmRecord> &farms) {
    std::string out = "farm_id,county_fips,livestock,class_index,subtype,heads\n";
    for (const auto &f : farms) {
        for (const auto &[subtype, heads] : f.heads_by_subtype) {
            if (heads == 0) {
                continue;
            }
            out += csv::join_row({f.id, f.county, f.livestock, std::to_string(f.size_class), subtype,
                                  std::to_string(heads)});
            out.push_back('\n');
        }
    }
    return out;
}

std::vector<FarmRecord> parse_farms(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"farm_id", "county_fips", "livestock", "class_index", "subtype", "heads"}},
                        source);
    std::vector<FarmRecord> out;
    std::map<std::string, std::size_t> index;
    for (const auto &row : table.rows) {
        const std::string at = source + ":" + std::to_string(row.line);
        const auto &f = row.fields;
        const Count heads = csv::parse_int(f[5], at);
        if (heads <= 0) {
            throw Error(ErrorKind::SchemaError, at + ": farm heads must be positive");
        }
        auto it = index.find(f[0]);
        if (it == index.end()) {
            FarmRecord rec;
            rec.id = f[0];
            rec.county = f[1];
            rec.livestock = f[2];
            rec.size_class = static_cast<int>(csv::parse_int(f[3], at));
            it = index.emplace(rec.id, out.size()).first;
            out.push_back(std::move(rec));
        }
        auto &rec = out[it->second];
        if (rec.county != f[1] || rec.livestock != f[2]) {
            throw Error(ErrorKind::SchemaError, at + ": farm " + rec.id + " changes county or livestock");
        }
        if (!rec.heads_by_subtype.emplace(f[4], heads).second) {
            throw Error(ErrorKind::SchemaError, at + ": duplicate subtype " + f[4] + " for farm " + rec.id);
        }
    }
    return out;
}

std::string write_assignments(const std::vector<FarmRecord> &farms) {
    std::string out = "farm_id,x,y\n";
    for (const auto &f : farms) {
        if (f.cell) {
            out += csv::join_row({f.id, std::to_string(f.cell->x), std::to_string(f.cell->y)});
            out.push_back('\n');
        }
    }
    return out;
}

void apply_assignments(std::string_view text, std::vector<FarmRecord> &farms, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"farm_id", "x", "y"}}, source);
    std::map<std::string, FarmRecord *> by_id;
    for (auto &f : farms) {
        by_id[f.id] = &f;
    }
    for (const auto &row : table.rows) {
        const std::string at = source + ":" + std::to_string(row.line);
        auto it = by_id.find(row.fields[0]);
        if (it == by_id.end()) {
            throw Error(ErrorKind::SchemaError, at + ": unknown farm " + row.fields[0]);
        }
        it->second->cell = CellId{static_cast<int>(csv::parse_int(row.fields[1], at)),
                                  static_cast<int>(csv::parse_int(row.fields[2], at))};
    }
}

} // namespace digisim::pipeline
