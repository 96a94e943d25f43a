#include "digisim/risk.hpp"
#include "digisim/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>

namespace digisim::risk {

std::string_view to_string(RiskCategory category) noexcept {
    switch (category) {
    case RiskCategory::VeryHigh:
        return "VERY_HIGH";
    case RiskCategory::High:
        return "HIGH";
    case RiskCategory::Medium:
        return "MEDIUM";
    case RiskCategory::Low:
        return "LOW";
    }
    return "LOW";
}

RiskCategory category_of(double percentile) noexcept {
    if (percentile >= 95) {
        return RiskCategory::VeryHigh;
    }
    if (percentile >= 90) {
        return RiskCategory::High;
    }
    if (percentile >= 75) {
        return RiskCategory::Medium;
    }
    return RiskCategory::Low;
}

std::vector<Period> default_periods() {
    return {{1, 1, 13}, {2, 14, 26}, {3, 27, 39}, {4, 40, 52}};
}

void validate_periods(const std::vector<Period> &periods) {
    if (periods.empty()) {
        throw Error(ErrorKind::ConfigError, "no risk periods configured");
    }
    int last = 0;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto &p = periods[i];
        if (p.index != static_cast<int>(i) + 1) {
            throw Error(ErrorKind::ConfigError, "risk periods must be numbered 1..n in order");
        }
        if (p.first_week <= last || p.first_week > p.last_week || p.last_week > 52) {
            throw Error(ErrorKind::ConfigError,
                        "risk period " + std::to_string(p.index) + " must be an ordered window within weeks 1..52");
        }
        last = p.last_week;
    }
}

std::optional<int> period_of_week(const std::vector<Period> &periods, int week) noexcept {
    for (const auto &p : periods) {
        if (week >= p.first_week && week <= p.last_week) {
            return p.index;
        }
    }
    return std::nullopt;
}

std::optional<int> week_of_date(std::string_view date) noexcept {
    if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    int m = 0;
    int d = 0;
    auto parse = [](std::string_view s, int &v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!parse(date.substr(0, 4), y) || !parse(date.substr(5, 2), m) || !parse(date.substr(8, 2), d)) {
        return std::nullopt;
    }
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12) {
        return std::nullopt;
    }
    const int month_days = days[static_cast<std::size_t>(m - 1)] + (m == 2 && leap ? 1 : 0);
    if (d < 1 || d > month_days) {
        return std::nullopt;
    }
    int doy = d;
    for (int k = 1; k < m; ++k) {
        doy += days[static_cast<std::size_t>(k - 1)] + (k == 2 && leap ? 1 : 0);
    }
    return std::min(52, (doy - 1) / 7 + 1);
}

std::map<int, GridLayer> weekly_abundance(const LayerSet &birds, const std::set<std::string> *species) {
    std::map<int, GridLayer> out;
    for (const auto &[key, layer] : birds) {
        if (key.kind != LayerKind::Birds || (species && !species->count(key.primary))) {
            continue;
        }
        auto it = out.find(key.week);
        if (it == out.end()) {
            it = out.emplace(key.week, GridLayer(LayerKey{LayerKind::Birds, "all", "", key.week})).first;
        }
        for (const auto &[cell, v] : layer.values()) {
            it->second.add(cell, v);
        }
    }
    return out;
}

RiskSurface compute_risk_surface(const std::map<CellId, double> &livestock, const std::map<int, GridLayer> &abundance,
                                 const ingest::Prevalence &prevalence, const std::string &subtype,
                                 const Period &period, const GridGeometry &geometry) {
    std::vector<const GridLayer *> a_weeks;
    std::vector<int> b_weeks;
    for (int w = period.first_week; w <= period.last_week; ++w) {
        if (auto it = abundance.find(w); it != abundance.end()) {
            a_weeks.push_back(&it->second);
        }
        if (prevalence.covers(w)) {
            b_weeks.push_back(w);
        }
    }
    const std::string where = "period " + std::to_string(period.index) + " (weeks " +
                              std::to_string(period.first_week) + "-" + std::to_string(period.last_week) + ")";
    if (a_weeks.empty()) {
        throw Error(ErrorKind::MissingLayer, "no bird abundance layer covers " + where);
    }
    if (b_weeks.empty()) {
        throw Error(ErrorKind::MissingLayer, "no prevalence value covers " + where);
    }
    RiskSurface out;
    out.subtype = subtype;
    out.period = period.index;
    for (const auto &county : geometry.counties()) {
        out.counties[county] = 0.0;
    }
    for (const auto &[cell, p] : livestock) {
        double a = 0;
        for (const auto *layer : a_weeks) {
            a += layer->value(cell);
        }
        a /= static_cast<double>(a_weeks.size());
        double b = 0;
        for (int w : b_weeks) {
            b += prevalence.at(cell, w);
        }
        b /= static_cast<double>(b_weeks.size());
        const double r = p * a * b;
        out.cells[cell] = r;
        if (geometry.contains(cell)) {
            out.counties[geometry.at(cell).county] += r;
        }
    }
    return out;
}

std::map<CellId, double> livestock_surface(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                                           const SubtypeId &subtype) {
    std::map<CellId, double> out;
    for (const auto &f : farms) {
        if (f.livestock != livestock || !f.cell) {
            continue;
        }
        for (const auto &[s, heads] : f.heads_by_subtype) {
            if (subtype == kAllSubtype || s == subtype) {
                out[*f.cell] += static_cast<double>(heads);
            }
        }
    }
    return out;
}

RiskSurface scenario_surface(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                             const std::map<int, GridLayer> &abundance, const ingest::Prevalence &prevalence,
                             const Period &period, const GridGeometry &geometry) {
    return compute_risk_surface(livestock_surface(farms, livestock, SubtypeId(kAllSubtype)), abundance, prevalence,
                                SubtypeId(kAllSubtype), period, geometry);
}

std::map<Fips, CountyRisk> categorize_scores(const std::map<Fips, double> &scores) {
    std::vector<double> sorted;
    sorted.reserve(scores.size());
    for (const auto &[county, s] : scores) {
        sorted.push_back(s);
    }
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::map<Fips, CountyRisk> out;
    for (const auto &[county, s] : scores) {
        CountyRisk r;
        r.score = s;
        if (n == 1) {
            r.percentile = 100;
        } else {
            const auto lower = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), s) -
                                                        sorted.begin());
            r.percentile = 100.0 * static_cast<double>(lower) / static_cast<double>(n - 1);
        }
        r.category = category_of(r.percentile);
        out[county] = r;
    }
    return out;
}

std::map<Fips, CountyRisk> categorize(const RiskSurface &surface) {
    return categorize_scores(surface.counties);
}

std::vector<Fips> persistence_rank(const std::map<Fips, std::vector<RiskCategory>> &categories) {
    std::vector<std::pair<Fips, std::array<int, 4>>> keyed;
    for (const auto &[county, cats] : categories) {
        std::array<int, 4> counts{};
        for (auto c : cats) {
            ++counts[static_cast<std::size_t>(c)];
        }
        keyed.emplace_back(county, counts);
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    std::vector<Fips> out;
    for (auto &[county, counts] : keyed) {
        out.push_back(county);
    }
    return out;
}

std::map<Fips, PeakPeriod> peak_period(const std::map<Fips, std::vector<double>> &scores) {
    std::map<Fips, PeakPeriod> out;
    for (const auto &[county, s] : scores) {
        PeakPeriod p;
        double best = s.empty() ? 0.0 : s[0];
        for (std::size_t t = 1; t < s.size(); ++t) {
            if (s[t] > best) {
                best = s[t];
                p.period = static_cast<int>(t) + 1;
            }
        }
        p.no_risk = std::all_of(s.begin(), s.end(), [](double v) { return v == 0; });
        out[county] = p;
    }
    return out;
}

Histogram incidence_concordance(const std::map<std::pair<Fips, int>, RiskCategory> &categories,
                                const std::vector<ingest::PointRecord> &incidence,
                                const std::vector<Period> &periods) {
    Histogram out;
    for (auto c : {RiskCategory::VeryHigh, RiskCategory::High, RiskCategory::Medium, RiskCategory::Low}) {
        out[std::string(to_string(c))] = 0;
    }
    out["UNKNOWN"] = 0;
    for (const auto &p : incidence) {
        std::optional<int> week;
        if (const auto *w = p.attribute("week")) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(w->data(), w->data() + w->size(), v);
            if (ec == std::errc{} && ptr == w->data() + w->size() && v >= 1 && v <= 52) {
                week = v;
            }
        } else if (const auto *d = p.attribute("date")) {
            week = week_of_date(*d);
        }
        std::optional<int> period = week ? period_of_week(periods, *week) : std::nullopt;
        auto it = period ? categories.find({p.county, *period}) : categories.end();
        if (it == categories.end()) {
            ++out["UNKNOWN"];
        } else {
            ++out[std::string(to_string(it->second))];
        }
    }
    return out;
}

} // namespace digisim::risk
