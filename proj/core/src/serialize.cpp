#include "mixboot/serialize.hpp"

#include "mixboot/dataset.hpp"
#include "mixboot/em.hpp"
#include "mixboot/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace mixboot {

std::string format_number(double value, int digits) {
  if (std::isnan(value)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    if (line.empty() || line.front() != '#') {
      out.append(line);
      out.push_back('\n');
    }
    pos = end + 1;
  }
  return out;
}

namespace {

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("invalid number '" + s + "'", row, col);
  return v;
}

Index parse_index(const std::string& s, std::size_t row, std::size_t col) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("invalid integer '" + s + "'", row, col);
  return static_cast<Index>(v);
}

// "key=value" pairs from the first comment line starting with `tag`.
std::map<std::string, std::string> comment_fields(std::string_view text, std::string_view tag) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  const std::string prefix = "# " + std::string(tag);
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) != 0) continue;
    std::istringstream words(line.substr(prefix.size()));
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq != std::string::npos) out[word.substr(0, eq)] = word.substr(eq + 1);
    }
    break;
  }
  if (out.empty()) throw ParseError("missing '" + prefix + "' header line", 0, 0);
  return out;
}

std::string require(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw ParseError("header line lacks '" + key + "'", 0, 0);
  return it->second;
}

ParamLayout layout_from_fields(const std::map<std::string, std::string>& fields) {
  const auto family = parse_family(require(fields, "family"));
  if (!family) throw ParseError("unknown covariance family '" + require(fields, "family") + "'", 0, 0);
  return ParamLayout(parse_index(require(fields, "G"), 0, 0), parse_index(require(fields, "p"), 0, 0), *family);
}

std::string layout_fields(const ParamLayout& layout) {
  return "G=" + std::to_string(layout.G()) + " p=" + std::to_string(layout.p()) +
         " family=" + std::string(mclust_name(layout.family()));
}

ResamplingMethod method_from(const std::string& name, std::size_t row) {
  const auto m = parse_method(name);
  if (!m) throw ParseError("unknown method '" + name + "'", row, 1);
  return *m;
}

std::vector<std::vector<std::string>> data_records(std::string_view text) {
  auto records = read_csv_records(strip_comments(text));
  if (records.empty()) throw ParseError("missing column header", 0, 0);
  records.erase(records.begin());
  return records;
}

}  // namespace

Json nest_params(const ParamLayout& layout, const Vector& values) {
  const Index G = layout.G();
  const Index p = layout.p();
  Json tau = Json::array();
  Json mu = Json::array();
  for (Index g = 0; g < G; ++g) {
    tau.push_back(0.0);
    mu.push_back(Json(std::vector<double>(static_cast<std::size_t>(p), 0.0)));
  }
  const Json zero_matrix(std::vector<std::vector<double>>(static_cast<std::size_t>(p),
                                                          std::vector<double>(static_cast<std::size_t>(p), 0.0)));
  Json sigma;
  switch (layout.family()) {
    case CovarianceFamily::FullVarying: sigma = Json::array(); for (Index g = 0; g < G; ++g) sigma.push_back(zero_matrix); break;
    case CovarianceFamily::FullEqual: sigma = zero_matrix; break;
    case CovarianceFamily::SphericalVarying: sigma = Json(std::vector<double>(static_cast<std::size_t>(G), 0.0)); break;
    case CovarianceFamily::SphericalEqual: sigma = 0.0; break;
  }

  for (Index i = 0; i < layout.size(); ++i) {
    const SlotInfo& s = layout.slot(i);
    const double v = values[i];
    const auto g = static_cast<std::size_t>(s.component);
    switch (s.kind) {
      case ParamKind::Tau: tau[g] = v; break;
      case ParamKind::Mu: mu[g][static_cast<std::size_t>(s.row)] = v; break;
      case ParamKind::Sigma: {
        if (s.row < 0) {
          if (s.component < 0) sigma = v; else sigma[g] = v;
          break;
        }
        Json& m = s.component < 0 ? sigma : sigma[g];
        m[static_cast<std::size_t>(s.row)][static_cast<std::size_t>(s.col)] = v;
        m[static_cast<std::size_t>(s.col)][static_cast<std::size_t>(s.row)] = v;
        break;
      }
    }
  }
  Json out;
  out["tau"] = std::move(tau);
  out["mu"] = std::move(mu);
  out["sigma"] = std::move(sigma);
  return out;
}

Vector unnest_params(const ParamLayout& layout, const Json& nested) {
  Vector values(layout.size());
  auto number = [](const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
  };
  try {
    for (Index i = 0; i < layout.size(); ++i) {
      const SlotInfo& s = layout.slot(i);
      const auto g = static_cast<std::size_t>(s.component);
      switch (s.kind) {
        case ParamKind::Tau: values[i] = number(nested.at("tau").at(g)); break;
        case ParamKind::Mu: values[i] = number(nested.at("mu").at(g).at(static_cast<std::size_t>(s.row))); break;
        case ParamKind::Sigma: {
          const Json& sigma = nested.at("sigma");
          const Json& cell = s.component < 0 ? sigma : sigma.at(g);
          values[i] = s.row < 0 ? number(cell)
                                : number(cell.at(static_cast<std::size_t>(s.row)).at(static_cast<std::size_t>(s.col)));
          break;
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("parameter block does not match its layout: ") + e.what(), 0, 0);
  }
  return values;
}

Json layout_to_json(const ParamLayout& layout) {
  return Json{{"G", layout.G()}, {"p", layout.p()}, {"family", std::string(mclust_name(layout.family()))}};
}

ParamLayout layout_from_json(const Json& j) {
  try {
    const auto family = parse_family(j.at("family").get<std::string>());
    if (!family) throw ParseError("unknown covariance family", 0, 0);
    return ParamLayout(j.at("G").get<Index>(), j.at("p").get<Index>(), *family);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid layout: ") + e.what(), 0, 0);
  }
}

Json fit_to_json(const FitResult& fit, Index n) {
  Json j;
  j["G"] = fit.model.components();
  j["family"] = std::string(mclust_name(fit.model.family));
  j["status"] = std::string(to_string(fit.status));
  j["iterations"] = fit.iterations;
  j["n"] = n;
  j["loglik"] = fit.loglik;
  j["bic"] = fit.bic;
  j["free_parameters"] = free_parameter_count(fit.model.components(), fit.model.dimension(), fit.model.family);
  const ParamVector params = flatten(fit.model);
  j["parameters"] = nest_params(params.layout, params.values);
  return j;
}

Json selection_to_json(const ModelSelection& selection, Index n) {
  Json j = fit_to_json(selection.best, n);
  Json table = Json::array();
  for (const auto& c : selection.candidates) {
    table.push_back({{"G", c.G},
                     {"family", std::string(mclust_name(c.family))},
                     {"status", std::string(to_string(c.status))},
                     {"loglik", c.loglik},
                     {"bic", c.bic}});
  }
  j["candidates"] = std::move(table);
  return j;
}

Json se_report_to_json(const SeReport& report) {
  const ParamLayout& layout = report.estimates.layout;
  Json j;
  j["method"] = std::string(to_string(report.method));
  j["layout"] = layout_to_json(layout);
  j["k_fitted"] = report.k_fitted;
  j["k_total"] = report.k_total;
  j["estimates"] = nest_params(layout, report.estimates.values);
  j["std_errors"] = nest_params(layout, report.std_errors);
  j["replicate_mean"] = nest_params(layout, report.replicate_mean);
  j["ci"] = {{"lower", nest_params(layout, report.ci_lower)}, {"upper", nest_params(layout, report.ci_upper)}};
  return j;
}

SeReport se_report_from_json(const Json& j) {
  try {
    SeReport r;
    r.method = method_from(j.at("method").get<std::string>(), 0);
    const ParamLayout layout = layout_from_json(j.at("layout"));
    r.estimates = {layout, unnest_params(layout, j.at("estimates"))};
    r.std_errors = unnest_params(layout, j.at("std_errors"));
    r.replicate_mean = unnest_params(layout, j.at("replicate_mean"));
    r.ci_lower = unnest_params(layout, j.at("ci").at("lower"));
    r.ci_upper = unnest_params(layout, j.at("ci").at("upper"));
    r.k_fitted = j.at("k_fitted").get<Index>();
    r.k_total = j.at("k_total").get<Index>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid standard-error report: ") + e.what(), 0, 0);
  }
}

std::string se_reports_to_csv(const std::vector<SeReport>& reports, int digits) {
  std::ostringstream out;
  if (!reports.empty()) out << "# layout " << layout_fields(reports.front().estimates.layout) << '\n';
  out << "method,slot,kind,estimate,std_error,replicate_mean,ci_lower,ci_upper,k_fitted,k_total\n";
  for (const auto& r : reports) {
    const ParamLayout& layout = r.estimates.layout;
    for (Index i = 0; i < layout.size(); ++i) {
      out << to_string(r.method) << ',' << csv_field(layout.slot(i).name) << ',' << to_string(layout.slot(i).kind)
          << ',' << format_number(r.estimates.values[i], digits) << ',' << format_number(r.std_errors[i], digits)
          << ',' << format_number(r.replicate_mean[i], digits) << ',' << format_number(r.ci_lower[i], digits)
          << ',' << format_number(r.ci_upper[i], digits) << ',' << r.k_fitted << ',' << r.k_total << '\n';
    }
  }
  return out.str();
}

std::vector<SeReport> se_reports_from_csv(std::string_view text) {
  const auto records = data_records(text);
  if (records.empty()) return {};
  const ParamLayout layout = layout_from_fields(comment_fields(text, "layout"));
  const Index d = layout.size();

  std::vector<SeReport> reports;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r + 1;
    if (rec.size() != 10) throw ParseError("expected 10 fields", row, 0);
    const ResamplingMethod method = method_from(rec[0], row);
    if (reports.empty() || reports.back().method != method) {
      SeReport fresh;
      fresh.method = method;
      fresh.estimates = {layout, Vector::Zero(d)};
      fresh.std_errors = fresh.replicate_mean = fresh.ci_lower = fresh.ci_upper = Vector::Zero(d);
      reports.push_back(std::move(fresh));
    }
    SeReport& rep = reports.back();
    const Index slot = layout.index_of(rec[1]);
    rep.estimates.values[slot] = parse_double(rec[3], row, 4);
    rep.std_errors[slot] = parse_double(rec[4], row, 5);
    rep.replicate_mean[slot] = parse_double(rec[5], row, 6);
    rep.ci_lower[slot] = parse_double(rec[6], row, 7);
    rep.ci_upper[slot] = parse_double(rec[7], row, 8);
    rep.k_fitted = parse_index(rec[8], row, 9);
    rep.k_total = parse_index(rec[9], row, 10);
  }
  return reports;
}

std::string replicates_to_csv(const ReplicateSet& set) {
  std::ostringstream out;
  out << "# replicates method=" << to_string(set.method) << " n=" << set.n << ' ' << layout_fields(set.layout)
      << " relabeled=" << set.relabeled << " worst_decrease=" << format_number(set.worst_decrease, 17) << '\n';
  out << "replicate,status";
  for (const auto& s : set.layout.slots()) out << ',' << csv_field(s.name);
  out << '\n';
  for (Index k = 0; k < set.K(); ++k) {
    const bool fitted = set.statuses[static_cast<std::size_t>(k)] == ReplicateStatus::Fitted;
    out << (k + 1) << ',' << (fitted ? "Fitted" : "NotFitted");
    for (Index i = 0; i < set.layout.size(); ++i) out << ',' << (fitted ? format_number(set.params(k, i), 17) : "");
    out << '\n';
  }
  return out.str();
}

ReplicateSet replicates_from_csv(std::string_view text) {
  const auto fields = comment_fields(text, "replicates");
  ReplicateSet set;
  set.method = method_from(require(fields, "method"), 0);
  set.n = parse_index(require(fields, "n"), 0, 0);
  set.layout = layout_from_fields(fields);
  set.relabeled = parse_index(require(fields, "relabeled"), 0, 0);
  set.worst_decrease = parse_double(require(fields, "worst_decrease"), 0, 0);

  const auto records = data_records(text);
  const Index d = set.layout.size();
  set.params = Matrix::Constant(static_cast<Index>(records.size()), d, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r + 1;
    if (static_cast<Index>(rec.size()) != d + 2) throw ParseError("wrong number of fields", row, 0);
    const bool fitted = rec[1] == "Fitted";
    if (!fitted && rec[1] != "NotFitted") throw ParseError("unknown status '" + rec[1] + "'", row, 2);
    set.statuses.push_back(fitted ? ReplicateStatus::Fitted : ReplicateStatus::NotFitted);
    if (!fitted) continue;
    for (Index i = 0; i < d; ++i)
      set.params(static_cast<Index>(r), i) = parse_double(rec[static_cast<std::size_t>(i + 2)], row, static_cast<std::size_t>(i + 3));
  }
  return set;
}

std::string kde_to_csv(const std::vector<KdeCurve>& curves, int digits) {
  std::ostringstream out;
  out << "method,slot_name,x,density\n";
  for (const auto& c : curves)
    for (const auto& pt : c.points)
      out << c.method << ',' << csv_field(c.slot) << ',' << format_number(pt.x, digits) << ','
          << format_number(pt.density, digits) << '\n';
  return out.str();
}

std::vector<KdeCurve> kde_from_csv(std::string_view text) {
  std::vector<KdeCurve> curves;
  const auto records = data_records(text);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != 4) throw ParseError("expected 4 fields", r + 1, 0);
    if (curves.empty() || curves.back().method != rec[0] || curves.back().slot != rec[1])
      curves.push_back({rec[0], rec[1], {}});
    curves.back().points.push_back({parse_double(rec[2], r + 1, 3), parse_double(rec[3], r + 1, 4)});
  }
  return curves;
}

Json coverage_to_json(const std::vector<CoverageResult>& results) {
  Json arr = Json::array();
  for (const auto& r : results) {
    Json covered = Json::object();
    for (Index i = 0; i < r.layout.size(); ++i) covered[r.layout.slot(i).name] = r.covered[static_cast<std::size_t>(i)];
    arr.push_back({{"model", r.model},
                   {"method", std::string(to_string(r.method))},
                   {"layout", layout_to_json(r.layout)},
                   {"datasets_total", r.datasets_total},
                   {"datasets_fitted", r.datasets_fitted},
                   {"covered", std::move(covered)}});
  }
  return arr;
}

std::vector<CoverageResult> coverage_from_json(const Json& j) {
  std::vector<CoverageResult> out;
  try {
    for (const auto& item : j) {
      CoverageResult r;
      r.model = item.at("model").get<std::string>();
      r.method = method_from(item.at("method").get<std::string>(), 0);
      r.layout = layout_from_json(item.at("layout"));
      r.datasets_total = item.at("datasets_total").get<Index>();
      r.datasets_fitted = item.at("datasets_fitted").get<Index>();
      for (const auto& s : r.layout.slots()) r.covered.push_back(item.at("covered").at(s.name).get<Index>());
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid coverage result: ") + e.what(), 0, 0);
  }
  return out;
}

std::string coverage_to_csv(const std::vector<CoverageResult>& results) {
  // Group by model, keeping first-appearance order.
  std::vector<std::string> models;
  for (const auto& r : results)
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);

  std::ostringstream out;
  for (const auto& model : models) {
    for (const auto& r : results) {
      if (r.model != model) continue;
      out << "# coverage model=" << model << ' ' << layout_fields(r.layout) << " total=" << r.datasets_total << '\n';
      break;
    }
  }
  out << "model,parameter,coverage_jk,coverage_bs,coverage_wlbs,fitted_jk,fitted_bs,fitted_wlbs,total\n";
  for (const auto& model : models) {
    std::array<const CoverageResult*, 3> by_method{};
    for (const auto& r : results)
      if (r.model == model) by_method[static_cast<std::size_t>(r.method)] = &r;
    const CoverageResult* any = nullptr;
    for (auto* r : by_method) if (r && !any) any = r;
    for (Index i = 0; i < any->layout.size(); ++i) {
      out << csv_field(model) << ',' << csv_field(any->layout.slot(i).name);
      for (auto* r : by_method) out << ',' << (r ? std::to_string(r->covered[static_cast<std::size_t>(i)]) : "");
      for (auto* r : by_method) out << ',' << (r ? std::to_string(r->datasets_fitted) : "");
      out << ',' << any->datasets_total << '\n';
    }
  }
  return out.str();
}

std::vector<CoverageResult> coverage_from_csv(std::string_view text) {
  // Per-model layouts from the comment lines.
  std::map<std::string, std::pair<ParamLayout, Index>> layouts;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# coverage ", 0) != 0) continue;
      std::map<std::string, std::string> fields;
      std::istringstream words(line.substr(11));
      std::string word;
      while (words >> word) {
        const auto eq = word.find('=');
        if (eq != std::string::npos) fields[word.substr(0, eq)] = word.substr(eq + 1);
      }
      layouts[require(fields, "model")] = {layout_from_fields(fields), parse_index(require(fields, "total"), 0, 0)};
    }
  }

  std::vector<CoverageResult> out;
  const auto records = data_records(text);
  std::string current;
  std::array<std::optional<CoverageResult>, 3> pending;
  auto flush = [&] {
    for (auto& p : pending)
      if (p) out.push_back(std::move(*p));
    pending = {};
  };
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r + 1;
    if (rec.size() != 9) throw ParseError("expected 9 fields", row, 0);
    if (rec[0] != current) {
      flush();
      current = rec[0];
      const auto it = layouts.find(current);
      if (it == layouts.end()) throw ParseError("no layout header for model '" + current + "'", row, 1);
      for (std::size_t m = 0; m < 3; ++m) {
        if (rec[2 + m].empty()) continue;
        CoverageResult c;
        c.model = current;
        c.method = kAllMethods[m];
        c.layout = it->second.first;
        c.datasets_total = it->second.second;
        c.datasets_fitted = parse_index(rec[5 + m], row, 6 + m);
        c.covered.assign(static_cast<std::size_t>(c.layout.size()), 0);
        pending[m] = std::move(c);
      }
    }
    for (std::size_t m = 0; m < 3; ++m) {
      if (!pending[m]) continue;
      const Index slot = pending[m]->layout.index_of(rec[1]);
      pending[m]->covered[static_cast<std::size_t>(slot)] = parse_index(rec[2 + m], row, 3 + m);
    }
  }
  flush();
  return out;
}

namespace {

Matrix matrix_from_json(const Json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) throw ParseError(what + " must be a non-empty array of rows", 0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != rows.front().size())
      throw ParseError(what + " has ragged rows", 0, 0);
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

SimulationModelSpec spec_from_json_text(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(std::string("malformed simulation spec: ") + e.what(), line, column);
  }

  try {
    SimulationModelSpec spec;
    spec.name = j.value("name", std::string("custom"));
    const auto tau = j.at("tau").get<std::vector<double>>();
    spec.tau = Eigen::Map<const Vector>(tau.data(), static_cast<Index>(tau.size()));
    spec.means = matrix_from_json(j.at("mu"), "mu");
    for (const auto& s : j.at("sigma")) spec.sigma.push_back(matrix_from_json(s, "sigma"));
    spec.n = j.value("n", Index{150});
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid simulation spec: ") + e.what(), 0, 0);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid simulation spec: ") + e.what(), 0, 0);
  }
}

Json spec_to_json(const SimulationModelSpec& spec) {
  Json mu = Json::array();
  for (Index g = 0; g < spec.G(); ++g) {
    std::vector<double> row;
    for (Index j = 0; j < spec.p(); ++j) row.push_back(spec.means(g, j));
    mu.push_back(row);
  }
  Json sigma = Json::array();
  for (const auto& s : spec.sigma) {
    Json m = Json::array();
    for (Index r = 0; r < s.rows(); ++r) {
      std::vector<double> row;
      for (Index c = 0; c < s.cols(); ++c) row.push_back(s(r, c));
      m.push_back(row);
    }
    sigma.push_back(std::move(m));
  }
  return {{"name", spec.name},
          {"tau", std::vector<double>(spec.tau.data(), spec.tau.data() + spec.tau.size())},
          {"mu", std::move(mu)},
          {"sigma", std::move(sigma)},
          {"n", spec.n}};
}

}  // namespace mixboot
