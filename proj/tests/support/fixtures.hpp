#pragma once
// Published leaderboard rows loaded from tests/fixtures/published_tables.tsv.

#include "isochrono/evaluation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fixtures {

struct Cell {
    std::optional<double> value; ///< empty for '-'
    std::string text;            ///< as printed, without the bold marker
    bool bold = false;
};

struct Row {
    isochrono::LanguagePair pair;
    std::string system;
    Cell icm;
    Cell qe;
    Cell aicm;

    bool complete() const { return icm.value && qe.value && aicm.value; }
};

std::string fixture_path(const std::string &name);

const std::vector<Row> &published_rows();
std::vector<Row> rows_for(const std::string &target);

/// One SystemReport per row: published values for complete rows, absent otherwise.
std::vector<isochrono::SystemReport> reports_for(const std::string &target);

} // namespace fixtures
