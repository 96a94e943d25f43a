#pragma once

#include "digisim/core.hpp"
#include "digisim/risk.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace digisim::pipeline {

namespace fs = std::filesystem;

struct InputPaths {
    fs::path census;
    fs::path size_classes;
    std::optional<fs::path> state_size_classes;
    fs::path geometry;
    std::optional<fs::path> glw;
    std::optional<fs::path> birds;
    std::optional<fs::path> population;
    std::optional<fs::path> points;
    std::optional<fs::path> prevalence;
    std::optional<fs::path> species_groups;
    std::optional<fs::path> bls;
    std::optional<fs::path> boundaries;
};

struct PipelineConfig {
    InputPaths inputs;
    /// Empty selects everything present in the census.
    std::vector<LivestockId> livestock;
    std::vector<Fips> counties;
    double genfarms_gap = 0.001;
    double assign_gap = 0.0001;
    double time_limit_seconds = 60;
    double ipf_tol = 1e-6;
    std::size_t ipf_max_iter = 10000;
    std::string cafo_thresholds = "default";
    LivestockId risk_livestock = "cattle";
    std::vector<risk::Period> periods = risk::default_periods();
    /// Restricts bird abundance to these species; empty uses all.
    std::vector<std::string> risk_species;
    std::string worker_employment = "livestock";
    fs::path output_dir = "out";
    std::size_t threads = 1;
    /// Canonical text of the settings that affect outputs (paths as written, no output dir).
    std::string canonical;
};

/// Parses a JSON config; relative paths resolve against `base_dir`. Throws ConfigError.
PipelineConfig parse_config(std::string_view text, const fs::path &base_dir);
PipelineConfig load_config(const fs::path &path);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

enum class Stage { Ingest, Gapfill, Ipf, GenFarms, Assign, Validate, Risk };
std::string_view to_string(Stage stage) noexcept;
const std::vector<Stage> &all_stages();

/// Stages run by a subcommand. `gapfill` covers FillGaps and IPF. Throws ConfigError.
std::vector<Stage> stages_for(std::string_view subcommand);

/// JSON-lines logger on standard error.
class Logger {
  public:
    explicit Logger(bool quiet = false) : quiet_{quiet} {}
    void log(std::string_view level, std::string_view stage, std::string_view message,
             const std::map<std::string, std::string> &fields = {});

  private:
    bool quiet_;
    std::mutex mutex_;
};

/// Writes through a temporary file in the same directory and renames. Throws IoError.
void write_atomic(const fs::path &path, std::string_view content);

/// Runs fn(0..n-1) on up to `threads` workers. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &fn);

/// Worker count from DIGISIM_THREADS, else `configured` (at least 1).
std::size_t resolve_threads(std::size_t configured);

/// farm_id,county_fips,livestock,class_index,subtype,heads; one row per nonzero subtype.
std::string write_farms(const std::vector<FarmRecord> &farms);
std::vector<FarmRecord> parse_farms(std::string_view text, const std::string &source = "farms.csv");

/// farm_id,x,y
std::string write_assignments(const std::vector<FarmRecord> &farms);
/// Sets the cell of each listed farm. Throws SchemaError for unknown farm ids.
void apply_assignments(std::string_view text, std::vector<FarmRecord> &farms,
                       const std::string &source = "assignments.csv");

struct RunOptions {
    std::vector<Fips> counties;
    std::vector<LivestockId> livestock;
    std::optional<fs::path> output_dir;
    bool quiet = false;
};

/// Runs the stages of `subcommand` and returns the process exit status. Failures are
/// written to errors.json in the output directory.
int run(std::string_view subcommand, const PipelineConfig &config, const RunOptions &options = {});

/// Writes the synthetic two-county dataset and its config.json into `dir`.
void write_fixture(const fs::path &dir);

} // namespace digisim::pipeline
