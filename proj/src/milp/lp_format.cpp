#include "digisim/csv.hpp"
#include "digisim/milp.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace digisim::milp {

namespace {

std::string sanitize(const std::string &name, std::size_t index, char prefix) {
    std::string out;
    for (char c : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') {
        out.insert(out.begin(), prefix);
    }
    return out + "_" + std::to_string(index);
}

std::string number(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "+inf" : "-inf";
    }
    return csv::format_double(v);
}

void append_terms(std::string &out, const std::vector<Term> &terms, const std::vector<std::string> &names) {
    if (terms.empty()) {
        out += " 0 " + names.front();
        return;
    }
    for (const auto &t : terms) {
        out += t.coef < 0 ? " - " : " + ";
        out += number(std::abs(t.coef));
        out += ' ';
        out += names[t.var.index];
    }
}

} // namespace

std::string to_lp_format(const Model &model) {
    const auto &vars = model.variables();
    std::vector<std::string> names;
    names.reserve(vars.size());
    for (std::size_t j = 0; j < vars.size(); ++j) {
        names.push_back(sanitize(vars[j].name, j, 'v'));
    }
    if (names.empty()) {
        names.push_back("dummy");
    }
    std::string out = "\\ digisim model\nMinimize\n obj:";
    append_terms(out, model.objective(), names);
    out += "\nSubject To\n";
    const auto &rows = model.constraints();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += ' ' + sanitize(rows[r].name, r, 'c') + ':';
        append_terms(out, rows[r].terms, names);
        out += rows[r].sense == Sense::LessEqual ? " <= " : rows[r].sense == Sense::Equal ? " = " : " >= ";
        out += number(rows[r].rhs) + '\n';
    }
    out += "Bounds\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        out += ' ' + number(vars[j].lower) + " <= " + names[j] + " <= " + number(vars[j].upper) + '\n';
    }
    std::string general;
    std::string binary;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].type == VarType::Integer) {
            general += ' ' + names[j] + '\n';
        } else if (vars[j].type == VarType::Binary) {
            binary += ' ' + names[j] + '\n';
        }
    }
    if (!general.empty()) {
        out += "General\n" + general;
    }
    if (!binary.empty()) {
        out += "Binary\n" + binary;
    }
    out += "End\n";
    return out;
}

} // namespace digisim::milp
