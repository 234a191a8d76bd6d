#pragma once

#include "isochrono/evaluation.hpp"

#include <span>
#include <string>
#include <string_view>

namespace isochrono {

enum class TableFormat { markdown, latex };
enum class TableSort { alphabetical, by_aicm };

TableFormat parse_table_format(std::string_view name);

/// Layout of one leaderboard table with columns I, Q and A.
///
/// A value is bolded when its displayed (two-decimal) form lies within the
/// column's margin of the column best: lowest I, highest Q and A. Default
/// margins reproduce the en-de leaderboard's emphasis; they are a heuristic.
struct TableSpec {
    LanguagePair pair;
    double bold_margin_icm = 0.03;
    double bold_margin_qe = 0.03;
    double bold_margin_aicm = 0.10;
    TableSort sort = TableSort::alphabetical;
};

/// One row per system; unscored systems print "-" in every metric cell.
/// Throws InvalidInput if a report belongs to another language pair.
std::string render_table(std::span<const SystemReport> reports, const TableSpec &spec, TableFormat format);

/// Rank order as produced by rank_systems(), with coverage and flags.
std::string render_ranking(std::span<const SystemReport> reports, TableFormat format);

std::string latex_escape(std::string_view s);

} // namespace isochrono
