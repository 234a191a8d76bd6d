#include "fixtures.hpp"

#include "isochrono/text.hpp"

#include <fstream>
#include <stdexcept>

#ifndef ISOCHRONO_TEST_DATA_DIR
#error "ISOCHRONO_TEST_DATA_DIR must point at tests/"
#endif

namespace fixtures {

namespace {

Cell parse_cell(std::string_view raw) {
    Cell c;
    if (!raw.empty() && raw.back() == '*') {
        c.bold = true;
        raw.remove_suffix(1);
    }
    c.text = std::string(raw);
    if (raw != "-") c.value = std::stod(c.text);
    return c;
}

std::vector<Row> load() {
    std::ifstream in(fixture_path("fixtures/published_tables.tsv"));
    if (!in) throw std::runtime_error("cannot open published_tables.tsv");
    std::vector<Row> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = isochrono::text::split(line, '\t');
        if (f.size() != 5) throw std::runtime_error("bad fixture line: " + line);
        rows.push_back({isochrono::LanguagePair::parse(f[0]), std::string(f[1]), parse_cell(f[2]),
                        parse_cell(f[3]), parse_cell(f[4])});
    }
    return rows;
}

} // namespace

std::string fixture_path(const std::string &name) { return std::string(ISOCHRONO_TEST_DATA_DIR) + "/" + name; }

const std::vector<Row> &published_rows() {
    static const std::vector<Row> rows = load();
    return rows;
}

std::vector<Row> rows_for(const std::string &target) {
    std::vector<Row> out;
    for (const auto &r : published_rows()) {
        if (r.pair.target == target) out.push_back(r);
    }
    return out;
}

std::vector<isochrono::SystemReport> reports_for(const std::string &target) {
    std::vector<isochrono::SystemReport> out;
    for (const auto &r : rows_for(target)) {
        if (r.complete()) {
            out.push_back(isochrono::SystemReport::published(r.system, r.pair, *r.icm.value, *r.qe.value,
                                                             *r.aicm.value));
        } else {
            out.push_back(isochrono::SystemReport::absent(r.system, r.pair));
        }
    }
    return out;
}

} // namespace fixtures
