#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claimex/extraction.hpp"
#include "claimex/judge.hpp"

namespace claimex {

// One benchmark-table row: a method/model cell aggregated over n pairs.
// Strict counts only the top category (fully entailed / fully
// decontextualized); lenient also admits the partial category.
struct AggregateReport {
    ExtractionMethod method = ExtractionMethod::text_only;
    std::string model_id;
    std::size_t n = 0;
    double mean_reference = 0.0;           // within [1, 4]
    double entailment_strict_pct = 0.0;    // within [0, 100], ≤ lenient
    double entailment_lenient_pct = 0.0;
    double decontext_strict_pct = 0.0;     // within [0, 100], ≤ lenient
    double decontext_lenient_pct = 0.0;
};

AggregateReport aggregate(const std::vector<ClaimEvaluation>& evaluations,
                          ExtractionMethod method, const std::string& model_id);

enum class Scale { nominal, ordinal };

Scale parse_scale(const std::string& name);
std::string to_string(Scale scale);

// Items × raters grid of ratings with missing cells allowed. Nominal labels
// are mapped to numeric codes on load (the legend keeps the mapping).
struct RaterMatrix {
    std::vector<std::string> items;
    std::vector<std::string> raters;
    std::vector<std::vector<std::optional<double>>> values;  // [item][rater]
    Scale scale = Scale::nominal;
    std::map<std::string, double> legend;  // label → code, when labels were mapped

    // Enforces ≥ 2 raters and ≥ 1 rating per item.
    void validate() const;
};

// Load a matrix from CSV: header "item,<rater>,...", one row per item,
// empty cell = missing rating. Quoted fields are honored. Non-numeric cells
// are assigned codes by first appearance (nominal scales only).
RaterMatrix load_rater_matrix_csv(const std::string& text, const std::string& origin, Scale scale);

struct AlphaResult {
    double value = 0.0;     // within [-1, 1]
    bool degenerate = false;  // expected disagreement was zero; value forced to 1
};

// Krippendorff's alpha with the difference function chosen by the matrix
// scale (nominal match/mismatch, or the cumulative-frequency ordinal metric).
// Missing cells participate through pairable values only.
AlphaResult krippendorff_alpha(const RaterMatrix& matrix);

// Same matrix, explicitly chosen difference function.
AlphaResult krippendorff_alpha(const RaterMatrix& matrix, Scale scale);

// Pearson correlation of average ranks (ties share the mean rank).
// Constant input has no defined correlation and fails.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct PercentAgreementResult {
    double value = 0.0;  // within [0, 100]
    std::size_t items_used = 0;
    std::vector<std::string> warnings;  // one per item excluded for < 2 ratings
};

// Mean over items of the fraction of agreeing rater pairs, ×100.
PercentAgreementResult percent_agreement(const RaterMatrix& matrix);

// Rendered benchmark tables: Markdown groups rows by model and bolds the
// best value per numeric column within each model section (1-decimal
// percentages, 2-decimal mean). CSV carries full precision, no marking.
std::string render_report_markdown(const std::vector<AggregateReport>& reports);
std::string render_report_csv(const std::vector<AggregateReport>& reports);

}  // namespace claimex
