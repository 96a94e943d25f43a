#include "digisim/csv.hpp"
#include "digisim/error.hpp"
#include "digisim/ingest.hpp"
#include "digisim/pipeline.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace digisim::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string &msg) { throw Error(ErrorKind::ConfigError, msg); }

const std::vector<std::string> kInputKeys = {"census",     "size_classes", "state_size_classes", "geometry",
                                             "glw",        "birds",        "population",         "points",
                                             "prevalence", "species_groups", "bls",              "boundaries"};
const std::vector<std::string> kRequiredInputs = {"census", "size_classes", "geometry"};
const std::vector<std::string> kTopKeys = {"inputs",          "livestock",         "counties",
                                           "genfarms_gap",    "assign_gap",        "time_limit_seconds",
                                           "ipf",             "cafo_thresholds",   "risk",
                                           "worker_employment", "output_dir",      "threads"};

template <class T> T get(const json &j, const std::string &key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &) {
        config_error("config key '" + key + "' has the wrong type");
    }
}

double fraction(const json &j, const std::string &key, double fallback) {
    const double v = get<double>(j, key, fallback);
    if (!(v > 0 && v < 1)) {
        config_error("config key '" + key + "' must lie in (0, 1)");
    }
    return v;
}

void reject_unknown(const json &j, const std::vector<std::string> &known, const std::string &where) {
    for (const auto &[k, v] : j.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            config_error("unknown config key '" + where + k + "'");
        }
    }
}

} // namespace

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineConfig parse_config(std::string_view text, const fs::path &base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        config_error("config must be a JSON object");
    }
    reject_unknown(j, kTopKeys, "");
    PipelineConfig c;
    json canon;

    const json inputs = j.value("inputs", json::object());
    if (!inputs.is_object()) {
        config_error("config key 'inputs' must be an object");
    }
    reject_unknown(inputs, kInputKeys, "inputs.");
    std::map<std::string, std::optional<fs::path>> paths;
    for (const auto &key : kInputKeys) {
        const auto raw = get<std::string>(inputs, key, "");
        if (raw.empty()) {
            if (std::find(kRequiredInputs.begin(), kRequiredInputs.end(), key) != kRequiredInputs.end()) {
                config_error("config lacks required input '" + key + "'");
            }
            paths[key] = std::nullopt;
            continue;
        }
        fs::path p(raw);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        if (!fs::exists(p)) {
            config_error("input '" + key + "' does not exist: " + raw);
        }
        paths[key] = p;
        canon["inputs"][key] = raw;
    }
    c.inputs.census = *paths["census"];
    c.inputs.size_classes = *paths["size_classes"];
    c.inputs.state_size_classes = paths["state_size_classes"];
    c.inputs.geometry = *paths["geometry"];
    c.inputs.glw = paths["glw"];
    c.inputs.birds = paths["birds"];
    c.inputs.population = paths["population"];
    c.inputs.points = paths["points"];
    c.inputs.prevalence = paths["prevalence"];
    c.inputs.species_groups = paths["species_groups"];
    c.inputs.bls = paths["bls"];
    c.inputs.boundaries = paths["boundaries"];

    c.livestock = get<std::vector<std::string>>(j, "livestock", {});
    c.counties = get<std::vector<std::string>>(j, "counties", {});
    c.genfarms_gap = fraction(j, "genfarms_gap", c.genfarms_gap);
    c.assign_gap = fraction(j, "assign_gap", c.assign_gap);
    c.time_limit_seconds = get<double>(j, "time_limit_seconds", c.time_limit_seconds);
    if (!(c.time_limit_seconds > 0)) {
        config_error("config key 'time_limit_seconds' must be positive");
    }

    const json ipf = j.value("ipf", json::object());
    reject_unknown(ipf, {"tol", "max_iter"}, "ipf.");
    c.ipf_tol = fraction(ipf, "tol", c.ipf_tol);
    c.ipf_max_iter = get<std::size_t>(ipf, "max_iter", c.ipf_max_iter);
    if (c.ipf_max_iter == 0) {
        config_error("config key 'ipf.max_iter' must be positive");
    }

    c.cafo_thresholds = get<std::string>(j, "cafo_thresholds", c.cafo_thresholds);

    const json r = j.value("risk", json::object());
    reject_unknown(r, {"livestock", "periods", "species"}, "risk.");
    c.risk_livestock = get<std::string>(r, "livestock", c.risk_livestock);
    if (r.contains("periods")) {
        const auto raw = get<std::vector<std::vector<int>>>(r, "periods", {});
        c.periods.clear();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i].size() != 2) {
                config_error("each risk period must be [first_week, last_week]");
            }
            c.periods.push_back({static_cast<int>(i) + 1, raw[i][0], raw[i][1]});
        }
    }
    risk::validate_periods(c.periods);
    c.risk_species = get<std::vector<std::string>>(r, "species", {});
    c.worker_employment = get<std::string>(j, "worker_employment", c.worker_employment);

    const auto out = get<std::string>(j, "output_dir", "out");
    c.output_dir = fs::path(out).is_relative() ? base_dir / out : fs::path(out);
    c.threads = get<std::size_t>(j, "threads", 1);

    canon["livestock"] = c.livestock;
    canon["counties"] = c.counties;
    canon["genfarms_gap"] = c.genfarms_gap;
    canon["assign_gap"] = c.assign_gap;
    canon["time_limit_seconds"] = c.time_limit_seconds;
    canon["ipf"] = {{"tol", c.ipf_tol}, {"max_iter", c.ipf_max_iter}};
    canon["cafo_thresholds"] = c.cafo_thresholds;
    json periods = json::array();
    for (const auto &p : c.periods) {
        periods.push_back({p.first_week, p.last_week});
    }
    canon["risk"] = {{"livestock", c.risk_livestock}, {"periods", periods}, {"species", c.risk_species}};
    canon["worker_employment"] = c.worker_employment;
    c.canonical = canon.dump();
    return c;
}

PipelineConfig load_config(const fs::path &path) {
    std::string text;
    try {
        text = csv::read_text(path);
    } catch (const Error &e) {
        config_error("cannot read config " + path.string() + ": " + e.what());
    }
    return parse_config(text, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::size_t resolve_threads(std::size_t configured) {
    if (const char *env = std::getenv("DIGISIM_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, configured);
}

} // namespace digisim::pipeline
