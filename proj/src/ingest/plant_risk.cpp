#include "digisim/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace digisim::ingest {

std::string_view to_string(PlantRiskLevel level) noexcept {
    switch (level) {
    case PlantRiskLevel::High:
        return "HIGH";
    case PlantRiskLevel::Medium:
        return "MEDIUM";
    case PlantRiskLevel::Low:
        return "LOW";
    case PlantRiskLevel::Unknown:
        return "UNKNOWN";
    }
    return "UNKNOWN";
}

namespace {

struct CodeRange {
    char letter;
    int first;
    int last;
    PlantRiskLevel level;
};

// Dairy plant product codes by exposure to unpasteurized milk.
constexpr CodeRange kCodeRanges[] = {
    {'M', 1, 3, PlantRiskLevel::High},    {'M', 6, 9, PlantRiskLevel::High},
    {'C', 3, 47, PlantRiskLevel::High},   {'B', 1, 9, PlantRiskLevel::High},
    {'M', 10, 14, PlantRiskLevel::Medium}, {'D', 1, 18, PlantRiskLevel::Low},
    {'W', 1, 25, PlantRiskLevel::Low},    {'F', 1, 15, PlantRiskLevel::Low},
    {'S', 4, 46, PlantRiskLevel::Low},
};

PlantRiskLevel classify_code(std::string_view code) {
    while (!code.empty() && std::isspace(static_cast<unsigned char>(code.front()))) {
        code.remove_prefix(1);
    }
    while (!code.empty() && std::isspace(static_cast<unsigned char>(code.back()))) {
        code.remove_suffix(1);
    }
    if (code.size() < 2 || !std::isalpha(static_cast<unsigned char>(code.front()))) {
        return PlantRiskLevel::Unknown;
    }
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(code.front())));
    int number = 0;
    const auto digits = code.substr(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        return PlantRiskLevel::Unknown;
    }
    // Section II (unapproved-source) plants.
    if (letter == 'P') {
        return PlantRiskLevel::High;
    }
    for (const auto &r : kCodeRanges) {
        if (r.letter == letter && number >= r.first && number <= r.last) {
            return r.level;
        }
    }
    return PlantRiskLevel::Unknown;
}

} // namespace

PlantRiskLevel classify_plant_risk(const std::vector<std::string> &product_codes) {
    PlantRiskLevel best = PlantRiskLevel::Unknown;
    for (const auto &code : product_codes) {
        best = std::max(best, classify_code(code));
    }
    return best;
}

} // namespace digisim::ingest
