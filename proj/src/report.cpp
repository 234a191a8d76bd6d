#include "isochrono/report.hpp"

#include "isochrono/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace isochrono {

namespace {

constexpr double bold_eps = 1e-9;

struct Cell {
    std::string text;
    bool bold = false;
};

std::string emphasize(const Cell &c, TableFormat format) {
    if (!c.bold) return c.text;
    return format == TableFormat::markdown ? "**" + c.text + "**" : "\\textbf{" + c.text + "}";
}

std::string md_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
    return buf;
}

} // namespace

TableFormat parse_table_format(std::string_view name) {
    if (name == "markdown" || name == "md") return TableFormat::markdown;
    if (name == "latex" || name == "tex") return TableFormat::latex;
    throw InvalidInput("table format must be 'markdown' or 'latex'");
}

std::string latex_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '_': case '&': case '%': case '$': case '#': case '{': case '}':
            out += '\\';
            out += c;
            break;
        case '~': out += "\\textasciitilde{}"; break;
        case '^': out += "\\textasciicircum{}"; break;
        case '\\': out += "\\textbackslash{}"; break;
        default: out += c;
        }
    }
    return out;
}

std::string render_table(std::span<const SystemReport> reports, const TableSpec &spec, TableFormat format) {
    if (spec.bold_margin_icm < 0 || spec.bold_margin_qe < 0 || spec.bold_margin_aicm < 0) {
        throw InvalidInput("bold margins must be nonnegative");
    }
    for (const auto &r : reports) {
        if (r.pair != spec.pair) {
            throw InvalidInput("report for " + r.system_name + " is " + r.pair.str() + ", table is " +
                               spec.pair.str());
        }
    }

    std::vector<SystemReport> rows;
    if (spec.sort == TableSort::by_aicm) {
        rows = rank_systems(reports);
    } else {
        rows.assign(reports.begin(), reports.end());
        std::stable_sort(rows.begin(), rows.end(), [](const SystemReport &a, const SystemReport &b) {
            return system_name_less(a.system_name, b.system_name);
        });
    }

    // Column bests on displayed values so emphasis agrees with what is printed.
    double best_i = std::numeric_limits<double>::infinity();
    double best_q = -std::numeric_limits<double>::infinity();
    double best_a = -std::numeric_limits<double>::infinity();
    for (const auto &r : rows) {
        if (!r.aggregate) continue;
        best_i = std::min(best_i, round_for_display(r.aggregate->mean_icm));
        best_q = std::max(best_q, round_for_display(r.aggregate->mean_qe));
        best_a = std::max(best_a, round_for_display(r.aggregate->aicm_from_means));
    }

    const std::string lang = spec.pair.target;
    std::ostringstream os;
    if (format == TableFormat::markdown) {
        os << "| Model | " << lang << "-I | " << lang << "-Q | " << lang << "-A |\n";
        os << "|---|---|---|---|\n";
    } else {
        os << "\\begin{tabular}{|l|c|c|c|}\n\\hline\n";
        os << "Model & " << lang << "-I & " << lang << "-Q & " << lang << "-A  \\\\\n\\hline\n";
    }

    for (const auto &r : rows) {
        Cell cells[3] = {{"-"}, {"-"}, {"-"}};
        if (r.aggregate) {
            const double i = round_for_display(r.aggregate->mean_icm);
            const double q = round_for_display(r.aggregate->mean_qe);
            const double a = round_for_display(r.aggregate->aicm_from_means);
            cells[0] = {format_metric(i), i - best_i <= spec.bold_margin_icm + bold_eps};
            cells[1] = {format_metric(q), best_q - q <= spec.bold_margin_qe + bold_eps};
            cells[2] = {format_metric(a), best_a - a <= spec.bold_margin_aicm + bold_eps};
        }
        if (format == TableFormat::markdown) {
            os << "| " << md_escape(r.system_name);
            for (const auto &c : cells) os << " | " << emphasize(c, format);
            os << " |\n";
        } else {
            os << latex_escape(r.system_name);
            for (const auto &c : cells) os << "& " << emphasize(c, format);
            os << "\\\\\n";
        }
    }
    if (format == TableFormat::latex) os << "\\hline\n\\end{tabular}\n";
    return os.str();
}

std::string render_ranking(std::span<const SystemReport> reports, TableFormat format) {
    const auto ranked = rank_systems(reports);
    std::ostringstream os;
    if (format == TableFormat::markdown) {
        os << "| Rank | System | Pair | I | Q | A | Coverage | Flags |\n";
        os << "|---|---|---|---|---|---|---|---|\n";
    } else {
        os << "\\begin{tabular}{|r|l|l|c|c|c|c|l|}\n\\hline\n";
        os << "Rank & System & Pair & I & Q & A & Coverage & Flags \\\\\n\\hline\n";
    }
    std::size_t rank = 0;
    for (const auto &r : ranked) {
        std::string flags;
        for (const auto f : r.flags) {
            if (!flags.empty()) flags += ",";
            flags += to_string(f);
        }
        std::vector<std::string> cells;
        cells.push_back(r.aggregate ? std::to_string(++rank) : "-");
        cells.push_back(r.system_name);
        cells.push_back(r.pair.str());
        if (r.aggregate) {
            cells.push_back(format_metric(r.aggregate->mean_icm));
            cells.push_back(format_metric(r.aggregate->mean_qe));
            cells.push_back(format_metric(r.aggregate->aicm_from_means));
        } else {
            cells.insert(cells.end(), {"-", "-", "-"});
        }
        cells.push_back(percent(r.coverage));
        cells.push_back(flags);

        if (format == TableFormat::markdown) {
            os << "|";
            for (const auto &c : cells) os << ' ' << md_escape(c) << " |";
            os << '\n';
        } else {
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (k) os << " & ";
                os << latex_escape(cells[k]);
            }
            os << " \\\\\n";
        }
    }
    if (format == TableFormat::latex) os << "\\hline\n\\end{tabular}\n";
    return os.str();
}

} // namespace isochrono
