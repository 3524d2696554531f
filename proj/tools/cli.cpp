#include "cli.hpp"

#include "mixboot/dataset.hpp"
#include "mixboot/error.hpp"
#include "mixboot/model_selection.hpp"
#include "mixboot/parallel.hpp"
#include "mixboot/resampling.hpp"
#include "mixboot/serialize.hpp"
#include "mixboot/simulation.hpp"
#include "mixboot/variance.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mixboot::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 1;
constexpr const char* kSeedEnv = "MIXBOOT_SEED";

struct Options {
  std::string data_path;
  std::string delimiter = ",";
  bool no_header = false;
  std::vector<std::string> columns;
  std::string sim_data;
  std::uint64_t sim_seed = 1;

  Index g_min = 1;
  Index g_max = 9;
  std::vector<std::string> families{"EII", "VII", "EEE", "VVV"};
  double tol = 1e-8;
  int max_iter = 1000;

  std::vector<std::string> methods;
  Index replicates = kDefaultReplicates;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  std::vector<std::string> models;
  std::string spec_file;
  Index datasets = 1000;
  std::optional<Index> n;
  double separation = 1.0;
  bool select_model = false;
  std::string policy = "all";

  std::vector<std::string> slots{"mu"};
  Index grid = 512;

  std::string format = "json";
  std::string out_path;
  bool omit_timing = false;
};

struct Seed {
  std::uint64_t value;
  std::string source;
};

Seed effective_seed(const Options& o) {
  if (o.seed) return {*o.seed, "flag"};
  if (const char* env = std::getenv(kSeedEnv)) {
    const std::string_view text(env);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw Error(ErrorCode::InvalidArgument, std::string(kSeedEnv) + " is not an unsigned integer");
    return {v, "env"};
  }
  return {kDefaultSeed, "default"};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

char delimiter_char(const std::string& d) {
  if (d == "tab" || d == "\\t") return '\t';
  if (d.size() != 1) throw Error(ErrorCode::InvalidArgument, "delimiter must be a single character");
  return d.front();
}

DatasetSource dataset_source(const Options& o) {
  DatasetSource src;
  if (!o.data_path.empty() && !o.sim_data.empty())
    throw Error(ErrorCode::InvalidArgument, "--data and --sim-data are mutually exclusive");
  if (!o.data_path.empty()) {
    src.origin = DatasetOrigin::CsvPath;
    src.path = o.data_path;
  } else if (!o.sim_data.empty()) {
    src.origin = DatasetOrigin::SimSpec;
    src.sim_model = o.sim_data;
    src.sim_seed = o.sim_seed;
  }
  src.csv.delimiter = delimiter_char(o.delimiter);
  src.csv.header = !o.no_header;
  src.csv.columns = o.columns;
  return src;
}

std::string origin_name(DatasetOrigin origin) {
  switch (origin) {
    case DatasetOrigin::BundledFaithful: return "faithful";
    case DatasetOrigin::CsvPath: return "csv";
    case DatasetOrigin::SimSpec: return "simulated";
  }
  return "unknown";
}

Json dataset_summary(const Dataset& d, const DatasetSource& src) {
  return {{"source", origin_name(src.origin)},
          {"description", d.description},
          {"n", d.data.n()},
          {"p", d.data.p()},
          {"columns", d.column_names}};
}

std::vector<CovarianceFamily> families_of(const Options& o) {
  std::vector<CovarianceFamily> out;
  for (const auto& name : o.families) {
    const auto f = parse_family(name);
    if (!f) throw Error(ErrorCode::InvalidArgument, "unknown covariance family '" + name + "'");
    out.push_back(*f);
  }
  return out;
}

std::vector<ResamplingMethod> methods_of(const Options& o, std::vector<std::string> fallback) {
  const auto& names = o.methods.empty() ? fallback : o.methods;
  std::vector<ResamplingMethod> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.assign(kAllMethods.begin(), kAllMethods.end());
      continue;
    }
    const auto m = parse_method(name);
    if (!m) throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected jk, bs or wlbs)");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

EmConfig em_config(const Options& o) {
  EmConfig em;
  em.tol = o.tol;
  em.max_iter = o.max_iter;
  return em;
}

SelectionConfig selection_config(const Options& o) {
  SelectionConfig sc;
  sc.g_min = o.g_min;
  sc.g_max = o.g_max;
  sc.families = families_of(o);
  sc.em = em_config(o);
  if (sc.g_min < 1 || sc.g_max < sc.g_min) throw Error(ErrorCode::InvalidArgument, "need 1 <= g-min <= g-max");
  return sc;
}

std::uint64_t method_seed(std::uint64_t seed, ResamplingMethod m) {
  return stream_seed(seed, 1 + static_cast<std::uint64_t>(m));
}

Json error_json(const Error& e) {
  Json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    j["row"] = pe->row();
    j["column"] = pe->column();
  }
  return j;
}

// Output document under construction plus the errors emitted along the way.
struct Report {
  Json config;
  Json summary;
  Json results = Json::array();
  std::vector<std::string> csv_comments;
  std::string csv_body;
  bool failed = false;
};

Json config_json(const std::string& verb, const Options& o, const Seed& seed) {
  Json c;
  c["command"] = verb;
  c["format"] = o.format;
  if (verb != "simulate") {
    const DatasetSource src = dataset_source(o);
    c["data"] = {{"source", origin_name(src.origin)},
                 {"path", o.data_path},
                 {"sim_model", o.sim_data},
                 {"sim_seed", o.sim_seed},
                 {"delimiter", o.delimiter},
                 {"header", !o.no_header},
                 {"columns", o.columns}};
    c["g_min"] = o.g_min;
    c["g_max"] = o.g_max;
    c["families"] = o.families;
  }
  c["tol"] = o.tol;
  c["max_iter"] = o.max_iter;
  if (verb != "fit") {
    c["seed"] = seed.value;
    c["seed_source"] = seed.source;
    c["replicates"] = o.replicates;
    c["threads"] = o.threads;
  }
  return c;
}

std::vector<std::string> config_comments(const Json& config) {
  std::vector<std::string> lines;
  for (const auto& [key, value] : config.items()) lines.push_back("# config " + key + "=" + value.dump());
  return lines;
}

std::string fit_comment(const FitResult& fit) {
  return "# fit G=" + std::to_string(fit.model.components()) + " family=" +
         std::string(mclust_name(fit.model.family)) + " status=" + std::string(to_string(fit.status)) +
         " loglik=" + format_number(fit.loglik, 17) + " bic=" + format_number(fit.bic, 17);
}

ModelSelection fit_model(const Dataset& d, const Options& o) {
  return select_model(d.data, selection_config(o));
}

void cmd_fit(const Options& o, Report& r) {
  const DatasetSource src = dataset_source(o);
  const Dataset d = load_dataset(src);
  r.summary = dataset_summary(d, src);
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSelection sel = fit_model(d, o);
  const double elapsed = seconds_since(t0);

  Json result = selection_to_json(sel, d.data.n());
  if (!o.omit_timing) result["elapsed_seconds"] = elapsed;
  r.results.push_back(std::move(result));

  r.csv_comments.push_back(fit_comment(sel.best));
  std::ostringstream body;
  body << "slot,kind,estimate\n";
  const ParamVector params = flatten(sel.best.model);
  for (Index i = 0; i < params.layout.size(); ++i) {
    const auto& s = params.layout.slot(i);
    const bool needs_quotes = s.name.find(',') != std::string::npos;
    body << (needs_quotes ? "\"" + s.name + "\"" : s.name) << ',' << to_string(s.kind) << ','
         << format_number(params.values[i], kCsvDigits) << '\n';
  }
  r.csv_body = body.str();
}

void check_replicates(const Options& o, const std::vector<ResamplingMethod>& methods) {
  for (auto m : methods)
    if (m != ResamplingMethod::Jackknife && o.replicates < 2)
      throw Error(ErrorCode::InvalidArgument, "bs and wlbs need at least 2 replicates");
}

void cmd_se(const Options& o, const Seed& seed, Report& r, std::ostream& err) {
  const auto methods = methods_of(o, {"jk", "bs", "wlbs"});
  check_replicates(o, methods);
  const DatasetSource src = dataset_source(o);
  const Dataset d = load_dataset(src);
  r.summary = dataset_summary(d, src);
  const ModelSelection sel = fit_model(d, o);
  const ParamVector estimates = flatten(sel.best.model);
  r.csv_comments.push_back(fit_comment(sel.best));

  ResamplingOptions options;
  options.em = em_config(o);
  options.threads = o.threads;
  std::vector<SeReport> reports;
  for (auto m : methods) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ReplicateSet set = run_resampling(d.data, sel.best, m, o.replicates, method_seed(seed.value, m), options);
      SeReport report = confidence_intervals(estimates, set);
      const double elapsed = seconds_since(t0);
      Json result = se_report_to_json(report);
      result["relabeled"] = set.relabeled;
      result["worst_decrease"] = set.worst_decrease;
      if (!o.omit_timing) {
        result["elapsed_seconds"] = elapsed;
        r.csv_comments.push_back("# elapsed method=" + std::string(to_string(m)) + " seconds=" + format_number(elapsed, 6));
      }
      r.results.push_back(std::move(result));
      reports.push_back(std::move(report));
    } catch (const Error& e) {
      // One method failing does not stop the others.
      r.failed = true;
      r.results.push_back({{"method", std::string(to_string(m))}, {"error", error_json(e)}});
      r.csv_comments.push_back("# error method=" + std::string(to_string(m)) + " code=" + std::string(to_string(e.code())));
      err << Json{{"error", error_json(e)}, {"method", std::string(to_string(m))}}.dump() << '\n';
    }
  }
  r.csv_body = se_reports_to_csv(reports);
}

std::vector<SimulationModelSpec> simulation_specs(const Options& o) {
  std::vector<SimulationModelSpec> specs;
  if (!o.spec_file.empty()) {
    std::ifstream in(o.spec_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + o.spec_file + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    specs.push_back(spec_from_json_text(buffer.str()));
  }
  for (const auto& name : o.models) {
    if (name == "all") {
      for (auto& [key, spec] : builtin_specs()) specs.push_back(spec);
    } else {
      specs.push_back(builtin_spec(name));
    }
  }
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "simulate needs --model or --spec-file");
  for (auto& s : specs) {
    if (o.n) s.n = *o.n;
    if (o.separation != 1.0) s = s.with_separation(o.separation);
    s.validate();
  }
  return specs;
}

void cmd_simulate(const Options& o, const Seed& seed, Report& r) {
  const auto methods = methods_of(o, {"jk", "bs", "wlbs"});
  if (o.datasets < 0) throw Error(ErrorCode::InvalidArgument, "--datasets must be >= 0");
  const auto specs = simulation_specs(o);

  CoverageConfig cc;
  cc.datasets = o.datasets;
  cc.replicates = o.replicates;
  cc.seed = seed.value;
  cc.threads = o.threads;
  cc.em = em_config(o);
  cc.select_model = o.select_model;
  cc.select_g_max = o.g_max;
  if (o.policy == "all") cc.policy = FittedPolicy::AllReplicates;
  else if (o.policy == "two") cc.policy = FittedPolicy::AtLeastTwo;
  else throw Error(ErrorCode::InvalidArgument, "--policy must be 'all' or 'two'");

  r.config["datasets"] = o.datasets;
  r.config["models"] = Json::array();
  for (const auto& s : specs) r.config["models"].push_back(spec_to_json(s));
  r.config["policy"] = o.policy;
  r.config["select_model"] = o.select_model;
  r.config["methods"] = Json::array();
  for (auto m : methods) r.config["methods"].push_back(std::string(to_string(m)));
  r.summary = {{"source", "simulated"}, {"models", specs.size()}, {"datasets_per_model", o.datasets}};

  std::vector<CoverageResult> all;
  for (const auto& spec : specs) {
    const auto t0 = std::chrono::steady_clock::now();
    auto results = run_coverage(spec, methods, cc);
    const double elapsed = seconds_since(t0);
    Json js = coverage_to_json(results);
    for (auto& item : js) {
      if (!o.omit_timing) item["elapsed_seconds"] = elapsed;
      r.results.push_back(std::move(item));
    }
    if (!o.omit_timing)
      r.csv_comments.push_back("# elapsed model=" + spec.name + " seconds=" + format_number(elapsed, 6));
    all.insert(all.end(), results.begin(), results.end());
  }
  r.csv_body = coverage_to_csv(all);
}

std::vector<Index> resolve_slots(const ParamLayout& layout, const std::vector<std::string>& names) {
  std::vector<Index> out;
  auto add = [&](Index i) {
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  };
  for (const auto& name : names) {
    if (name == "all") {
      for (Index i = 0; i < layout.size(); ++i) add(i);
    } else if (name == "tau" || name == "mu" || name == "sigma") {
      const ParamKind kind = name == "tau" ? ParamKind::Tau : name == "mu" ? ParamKind::Mu : ParamKind::Sigma;
      for (Index i : layout.slots_of(kind)) add(i);
    } else {
      add(layout.index_of(name));
    }
  }
  return out;
}

void cmd_density(const Options& o, const Seed& seed, Report& r) {
  const auto methods = methods_of(o, {"bs", "wlbs"});
  check_replicates(o, methods);
  if (o.grid < 2) throw Error(ErrorCode::InvalidArgument, "--grid must be >= 2");
  const DatasetSource src = dataset_source(o);
  const Dataset d = load_dataset(src);
  r.summary = dataset_summary(d, src);
  const ModelSelection sel = fit_model(d, o);
  const ParamVector estimates = flatten(sel.best.model);
  const auto slots = resolve_slots(estimates.layout, o.slots);
  r.config["slots"] = o.slots;
  r.config["grid"] = o.grid;
  r.csv_comments.push_back(fit_comment(sel.best));

  std::vector<KdeCurve> curves;
  for (Index s : slots) {
    const std::string& name = estimates.layout.slot(s).name;
    curves.push_back({"mle", name, {{estimates.values[s], 0.0}}});
  }
  ResamplingOptions options;
  options.em = em_config(o);
  options.threads = o.threads;
  for (auto m : methods) {
    const ReplicateSet set = run_resampling(d.data, sel.best, m, o.replicates, method_seed(seed.value, m), options);
    for (Index s : slots)
      curves.push_back({std::string(to_string(m)), estimates.layout.slot(s).name, kde_curves(set, s, o.grid)});
  }
  for (const auto& c : curves) {
    Json pts = Json::array();
    for (const auto& p : c.points) pts.push_back({p.x, p.density});
    r.results.push_back({{"method", c.method}, {"slot", c.slot}, {"points", std::move(pts)}});
  }
  r.csv_body = kde_to_csv(curves);
}

void emit(const Report& r, const Options& o, std::ostream& out) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!o.out_path.empty()) {
    file.open(o.out_path, std::ios::binary);
    if (!file) throw Error(ErrorCode::MissingFile, "cannot write '" + o.out_path + "'");
    sink = &file;
  }
  if (o.format == "csv") {
    for (const auto& line : config_comments(r.config)) *sink << line << '\n';
    for (const auto& line : r.csv_comments) *sink << line << '\n';
    *sink << r.csv_body;
  } else {
    Json doc;
    doc["config"] = r.config;
    doc["dataset_summary"] = r.summary;
    doc["results"] = r.results;
    *sink << doc.dump(2) << '\n';
  }
}

void add_data_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--data", o.data_path, "CSV file (default: bundled Old Faithful data)");
  cmd.add_option("--sim-data", o.sim_data, "Draw the data from a builtin simulation model (M1..M8)");
  cmd.add_option("--sim-seed", o.sim_seed, "Seed for --sim-data");
  cmd.add_option("--delimiter", o.delimiter, "CSV field delimiter ('tab' for tabs)");
  cmd.add_flag("--no-header", o.no_header, "CSV has no header row");
  cmd.add_option("--columns", o.columns, "Columns to keep, by name or 1-based position")->delimiter(',');
}

void add_selection_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--g-min", o.g_min, "Smallest number of components")->capture_default_str();
  cmd.add_option("--g-max", o.g_max, "Largest number of components")->capture_default_str();
  cmd.add_option("--families", o.families, "Covariance families (EII,VII,EEE,VVV)")->delimiter(',');
}

void add_common_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd.add_option("--out", o.out_path, "Write output here instead of stdout");
  cmd.add_option("--tol", o.tol, "EM relative convergence tolerance")->capture_default_str();
  cmd.add_option("--max-iter", o.max_iter, "EM iteration limit")->capture_default_str();
}

void add_resampling_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--method", o.methods, "jk, bs, wlbs or all")->delimiter(',');
  cmd.add_option("--replicates", o.replicates, "Bootstrap replicates K")->capture_default_str();
  cmd.add_option("--seed", o.seed, std::string("Master seed (default: $") + kSeedEnv + " or 1)");
  cmd.add_option("--threads", o.threads, "Worker threads, 0 = all cores")->capture_default_str();
  cmd.add_flag("--omit-timing", o.omit_timing, "Leave wall-clock times out of the output");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Gaussian mixture clustering with resampling-based standard errors", "mixboot"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Select and fit a mixture model by BIC");
  add_data_options(*fit, o);
  add_selection_options(*fit, o);
  add_common_options(*fit, o);
  fit->add_flag("--omit-timing", o.omit_timing, "Leave wall-clock times out of the output");

  auto* se = app.add_subcommand("se", "Standard errors and intervals by jackknife and bootstraps");
  add_data_options(*se, o);
  add_selection_options(*se, o);
  add_common_options(*se, o);
  add_resampling_options(*se, o);

  auto* sim = app.add_subcommand("simulate", "Interval coverage over simulated data sets");
  sim->add_option("--model", o.models, "Builtin models M1..M8, or all")->delimiter(',');
  sim->add_option("--spec-file", o.spec_file, "JSON model spec {name, tau, mu, sigma, n}");
  sim->add_option("--datasets", o.datasets, "Data sets per model")->capture_default_str();
  sim->add_option("--n", o.n, "Override the sample size of each data set");
  sim->add_option("--separation", o.separation, "Scale distances between true means")->capture_default_str();
  sim->add_flag("--select-model", o.select_model, "Choose (G, family) by BIC per data set");
  sim->add_option("--g-max", o.g_max, "Largest G tried with --select-model");
  sim->add_option("--policy", o.policy, "Fitted when all replicates fit ('all') or at least two ('two')")
      ->capture_default_str();
  add_common_options(*sim, o);
  add_resampling_options(*sim, o);

  auto* dens = app.add_subcommand("density", "Kernel densities of replicate estimates");
  add_data_options(*dens, o);
  add_selection_options(*dens, o);
  add_common_options(*dens, o);
  add_resampling_options(*dens, o);
  dens->add_option("--slots", o.slots, "Parameter slots such as mu[1][1] or sigma[1,2]; tau, mu, sigma or all")
      ->capture_default_str();
  dens->add_option("--grid", o.grid, "Grid points per curve")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", {{"code", "InvalidArgument"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }

  try {
    const std::string verb = app.get_subcommands().front()->get_name();
    const Seed seed = effective_seed(o);
    Report r;
    r.config = config_json(verb, o, seed);
    if (verb == "fit") cmd_fit(o, r);
    else if (verb == "se") cmd_se(o, seed, r, err);
    else if (verb == "simulate") cmd_simulate(o, seed, r);
    else cmd_density(o, seed, r);
    emit(r, o, out);
    return r.failed ? 1 : 0;
  } catch (const Error& e) {
    err << Json{{"error", error_json(e)}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << Json{{"error", {{"code", "InvalidArgument"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
}

}  // namespace mixboot::cli
