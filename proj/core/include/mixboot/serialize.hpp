#pragma once

#include "mixboot/model_selection.hpp"
#include "mixboot/params.hpp"
#include "mixboot/resampling.hpp"
#include "mixboot/simulation.hpp"
#include "mixboot/variance.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace mixboot {

using Json = nlohmann::ordered_json;

/// Significant digits used by the report CSV writers.
inline constexpr int kCsvDigits = 6;

std::string format_number(double value, int digits);

// Parameter vectors nested by kind: {"tau": [..], "mu": [[..]..], "sigma": ..}.
// sigma is a list of p x p matrices (VVV), one matrix (EEE), a list of
// variances (VII) or a single variance (EII).
Json nest_params(const ParamLayout& layout, const Vector& values);
Vector unnest_params(const ParamLayout& layout, const Json& nested);

Json layout_to_json(const ParamLayout& layout);
ParamLayout layout_from_json(const Json& j);

Json fit_to_json(const FitResult& fit, Index n);
Json selection_to_json(const ModelSelection& selection, Index n);

Json se_report_to_json(const SeReport& report);
SeReport se_report_from_json(const Json& j);

/// One row per slot per report; first line is a layout comment.
std::string se_reports_to_csv(const std::vector<SeReport>& reports, int digits = kCsvDigits);
std::vector<SeReport> se_reports_from_csv(std::string_view text);

/// Full precision so standard errors can be recomputed from the file.
std::string replicates_to_csv(const ReplicateSet& set);
ReplicateSet replicates_from_csv(std::string_view text);

struct KdeCurve {
  std::string method;  // "jk", "bs", "wlbs", or "mle" for the marker row
  std::string slot;
  std::vector<KdePoint> points;
};

std::string kde_to_csv(const std::vector<KdeCurve>& curves, int digits = kCsvDigits);
std::vector<KdeCurve> kde_from_csv(std::string_view text);

Json coverage_to_json(const std::vector<CoverageResult>& results);
std::vector<CoverageResult> coverage_from_json(const Json& j);
/// Rows are (model, parameter); column groups are coverage and number fitted
/// for jk, bs and wlbs. Methods that were not run are left blank.
std::string coverage_to_csv(const std::vector<CoverageResult>& results);
std::vector<CoverageResult> coverage_from_csv(std::string_view text);

/// {"name", "tau", "mu", "sigma", "n"}; errors carry line and column.
SimulationModelSpec spec_from_json_text(std::string_view text);
Json spec_to_json(const SimulationModelSpec& spec);

/// Drops lines starting with '#'.
std::string strip_comments(std::string_view text);

}  // namespace mixboot
