#include "claimex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

AggregateReport aggregate(const std::vector<ClaimEvaluation>& evaluations,
                          ExtractionMethod method, const std::string& model_id) {
    if (evaluations.empty()) {
        fail(ErrorKind::data, "cannot aggregate an empty evaluation list");
    }
    AggregateReport report;
    report.method = method;
    report.model_id = model_id;
    report.n = evaluations.size();

    double score_sum = 0.0;
    std::size_t entailed = 0, partially_entailed = 0;
    std::size_t fully_decontext = 0, partially_decontext = 0;
    for (const auto& evaluation : evaluations) {
        score_sum += evaluation.reference.score;
        if (evaluation.entailment == EntailmentLabel::entailed) ++entailed;
        if (evaluation.entailment == EntailmentLabel::partially_entailed) ++partially_entailed;
        if (evaluation.decontext == DecontextLabel::fully_decontextualized) ++fully_decontext;
        if (evaluation.decontext == DecontextLabel::partially_decontextualized) {
            ++partially_decontext;
        }
    }
    const double n = static_cast<double>(report.n);
    report.mean_reference = score_sum / n;
    report.entailment_strict_pct = 100.0 * static_cast<double>(entailed) / n;
    report.entailment_lenient_pct =
        100.0 * static_cast<double>(entailed + partially_entailed) / n;
    report.decontext_strict_pct = 100.0 * static_cast<double>(fully_decontext) / n;
    report.decontext_lenient_pct =
        100.0 * static_cast<double>(fully_decontext + partially_decontext) / n;
    return report;
}

Scale parse_scale(const std::string& name) {
    if (name == "nominal") return Scale::nominal;
    if (name == "ordinal") return Scale::ordinal;
    fail(ErrorKind::usage, "unknown scale \"" + name + "\" (expected nominal or ordinal)");
}

std::string to_string(Scale scale) {
    return scale == Scale::nominal ? "nominal" : "ordinal";
}

void RaterMatrix::validate() const {
    if (raters.size() < 2) fail(ErrorKind::data, "a rater matrix needs at least 2 raters");
    if (items.size() != values.size()) {
        fail(ErrorKind::data, "rater matrix row count does not match item count");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (values[i].size() != raters.size()) {
            fail(ErrorKind::data, "rater matrix row " + items[i] + " has the wrong width");
        }
        bool any = false;
        for (const auto& cell : values[i]) {
            if (cell.has_value()) any = true;
        }
        if (!any) fail(ErrorKind::data, "item " + items[i] + " has no ratings at all");
    }
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

bool parse_numeric(const std::string& text, double& out) {
    if (text.empty()) return false;
    std::size_t consumed = 0;
    try {
        out = std::stod(text, &consumed);
    } catch (const std::exception&) {
        return false;
    }
    return consumed == text.size();
}

}  // namespace

RaterMatrix load_rater_matrix_csv(const std::string& text, const std::string& origin, Scale scale) {
    std::istringstream stream(text);
    std::string line;
    std::size_t line_number = 0;

    RaterMatrix matrix;
    matrix.scale = scale;

    if (!std::getline(stream, line)) fail(ErrorKind::data, origin + ": empty rater CSV");
    ++line_number;
    auto header = parse_csv_line(line);
    if (header.size() < 3) {
        fail(ErrorKind::data, origin + ":1: header needs an item column and at least 2 raters");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string name = trim(header[c]);
        if (name.empty()) fail(ErrorKind::data, origin + ":1: empty rater name in header");
        matrix.raters.push_back(std::move(name));
    }

    double next_code = 0.0;
    while (std::getline(stream, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        std::string where = origin + ":" + std::to_string(line_number);
        auto fields = parse_csv_line(line);
        if (fields.size() != header.size()) {
            fail(ErrorKind::data, where + ": expected " + std::to_string(header.size()) +
                                      " fields, found " + std::to_string(fields.size()));
        }
        matrix.items.push_back(trim(fields[0]));
        std::vector<std::optional<double>> row;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            std::string cell = trim(fields[c]);
            if (cell.empty()) {
                row.push_back(std::nullopt);
                continue;
            }
            double value = 0.0;
            if (parse_numeric(cell, value)) {
                row.push_back(value);
                continue;
            }
            if (scale == Scale::ordinal) {
                fail(ErrorKind::data, where + ": ordinal rating \"" + cell + "\" is not numeric");
            }
            auto [it, inserted] = matrix.legend.try_emplace(to_lower(cell), next_code);
            if (inserted) next_code += 1.0;
            row.push_back(it->second);
        }
        matrix.values.push_back(std::move(row));
    }
    matrix.validate();
    return matrix;
}

AlphaResult krippendorff_alpha(const RaterMatrix& matrix) {
    return krippendorff_alpha(matrix, matrix.scale);
}

AlphaResult krippendorff_alpha(const RaterMatrix& matrix, Scale scale) {
    matrix.validate();

    // Pairable values: only items with two or more ratings can disagree.
    std::vector<std::vector<double>> units;
    for (const auto& row : matrix.values) {
        std::vector<double> ratings;
        for (const auto& cell : row) {
            if (cell.has_value()) ratings.push_back(*cell);
        }
        if (ratings.size() >= 2) units.push_back(std::move(ratings));
    }
    if (units.empty()) {
        fail(ErrorKind::data, "agreement is undefined: no item has 2 or more ratings");
    }

    std::size_t total = 0;
    std::map<double, std::size_t> counts;  // ordered: ordinal metric needs ascending categories
    for (const auto& unit : units) {
        total += unit.size();
        for (double v : unit) ++counts[v];
    }

    std::vector<double> categories;
    std::vector<double> category_counts;
    for (const auto& [value, count] : counts) {
        categories.push_back(value);
        category_counts.push_back(static_cast<double>(count));
    }

    auto category_index = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(categories.begin(), categories.end(), v) - categories.begin());
    };

    // Squared difference between categories (by index, ascending order).
    auto delta_sq = [&](std::size_t a, std::size_t b) -> double {
        if (a == b) return 0.0;
        if (scale == Scale::nominal) return 1.0;
        std::size_t lo = std::min(a, b), hi = std::max(a, b);
        double between = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) between += category_counts[g];
        double d = between - (category_counts[lo] + category_counts[hi]) / 2.0;
        return d * d;
    };

    double observed = 0.0;
    for (const auto& unit : units) {
        double unit_sum = 0.0;
        for (std::size_t i = 0; i < unit.size(); ++i) {
            for (std::size_t j = 0; j < unit.size(); ++j) {
                if (i == j) continue;
                unit_sum += delta_sq(category_index(unit[i]), category_index(unit[j]));
            }
        }
        observed += unit_sum / static_cast<double>(unit.size() - 1);
    }
    observed /= static_cast<double>(total);

    double expected = 0.0;
    for (std::size_t a = 0; a < categories.size(); ++a) {
        for (std::size_t b = 0; b < categories.size(); ++b) {
            if (a == b) continue;
            expected += category_counts[a] * category_counts[b] * delta_sq(a, b);
        }
    }
    expected /= static_cast<double>(total) * static_cast<double>(total - 1);

    if (expected == 0.0) return AlphaResult{1.0, true};
    return AlphaResult{1.0 - observed / expected, false};
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

bool is_constant(const std::vector<double>& values) {
    for (const auto& v : values) {
        if (v != values.front()) return false;
    }
    return true;
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        fail(ErrorKind::data, "rank correlation needs sequences of equal length");
    }
    if (x.size() < 2) fail(ErrorKind::data, "rank correlation needs at least 2 observations");
    if (is_constant(x) || is_constant(y)) {
        fail(ErrorKind::data, "rank correlation is undefined for a constant sequence");
    }

    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    const std::size_t n = rx.size();

    // Identical or exactly mirrored rankings are ±1 by definition; returning
    // them directly keeps monotone inputs exact.
    bool same = true, mirrored = true;
    const double rank_sum = static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (rx[i] != ry[i]) same = false;
        if (ry[i] != rank_sum - rx[i]) mirrored = false;
    }
    if (same) return 1.0;
    if (mirrored) return -1.0;

    const double mean = rank_sum / 2.0;
    double cross = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        cross += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    return cross / std::sqrt(var_x * var_y);
}

PercentAgreementResult percent_agreement(const RaterMatrix& matrix) {
    matrix.validate();
    PercentAgreementResult out;
    double fraction_sum = 0.0;
    for (std::size_t i = 0; i < matrix.items.size(); ++i) {
        std::vector<double> ratings;
        for (const auto& cell : matrix.values[i]) {
            if (cell.has_value()) ratings.push_back(*cell);
        }
        if (ratings.size() < 2) {
            out.warnings.push_back("item " + matrix.items[i] +
                                   " has fewer than 2 ratings and was excluded");
            continue;
        }
        std::size_t pairs = 0, matches = 0;
        for (std::size_t a = 0; a < ratings.size(); ++a) {
            for (std::size_t b = a + 1; b < ratings.size(); ++b) {
                ++pairs;
                if (ratings[a] == ratings[b]) ++matches;
            }
        }
        fraction_sum += static_cast<double>(matches) / static_cast<double>(pairs);
        ++out.items_used;
    }
    if (out.items_used == 0) {
        fail(ErrorKind::data, "percent agreement is undefined: no item has 2 or more ratings");
    }
    out.value = 100.0 * fraction_sum / static_cast<double>(out.items_used);
    return out;
}

namespace {

struct ReportColumn {
    const char* heading;
    double AggregateReport::* field;
    int decimals;
};

const ReportColumn kReportColumns[] = {
    {"Reference (mean)", &AggregateReport::mean_reference, 2},
    {"Entailed % (strict)", &AggregateReport::entailment_strict_pct, 1},
    {"Entailed % (lenient)", &AggregateReport::entailment_lenient_pct, 1},
    {"Decontext % (strict)", &AggregateReport::decontext_strict_pct, 1},
    {"Decontext % (lenient)", &AggregateReport::decontext_lenient_pct, 1},
};

std::vector<std::string> model_order(const std::vector<AggregateReport>& reports) {
    std::vector<std::string> models;
    for (const auto& report : reports) {
        if (std::find(models.begin(), models.end(), report.model_id) == models.end()) {
            models.push_back(report.model_id);
        }
    }
    return models;
}

}  // namespace

std::string render_report_markdown(const std::vector<AggregateReport>& reports) {
    std::string out = "# Claim Extraction Benchmark\n";
    for (const auto& model : model_order(reports)) {
        std::vector<const AggregateReport*> rows;
        for (const auto& report : reports) {
            if (report.model_id == model) rows.push_back(&report);
        }

        out += "\n## " + model + "\n\n";
        out += "| Method | N |";
        for (const auto& column : kReportColumns) {
            out += ' ';
            out += column.heading;
            out += " |";
        }
        out += "\n|---|---:|";
        for (std::size_t c = 0; c < std::size(kReportColumns); ++c) out += "---:|";
        out += '\n';

        double best[std::size(kReportColumns)];
        for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
            best[c] = rows.front()->*kReportColumns[c].field;
            for (const auto* row : rows) best[c] = std::max(best[c], row->*kReportColumns[c].field);
        }

        for (const auto* row : rows) {
            out += "| " + display_name(row->method) + " | " + std::to_string(row->n) + " |";
            for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
                double value = row->*kReportColumns[c].field;
                std::string cell = format_fixed(value, kReportColumns[c].decimals);
                if (value == best[c]) cell = "**" + cell + "**";
                out += ' ' + cell + " |";
            }
            out += '\n';
        }
    }
    return out;
}

std::string render_report_csv(const std::vector<AggregateReport>& reports) {
    std::string out =
        "model,method,n,mean_reference,entailment_strict_pct,entailment_lenient_pct,"
        "decontext_strict_pct,decontext_lenient_pct\n";
    for (const auto& report : reports) {
        out += report.model_id + ',' + to_string(report.method) + ',' + std::to_string(report.n) +
               ',' + format_full(report.mean_reference) + ',' +
               format_full(report.entailment_strict_pct) + ',' +
               format_full(report.entailment_lenient_pct) + ',' +
               format_full(report.decontext_strict_pct) + ',' +
               format_full(report.decontext_lenient_pct) + '\n';
    }
    return out;
}

}  // namespace claimex
