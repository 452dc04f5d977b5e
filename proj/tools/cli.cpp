#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "prime/dataset.hpp"
#include "prime/errors.hpp"
#include "prime/fit_io.hpp"
#include "prime/keyvalue.hpp"
#include "prime/model_averaging.hpp"
#include "prime/prime_fit.hpp"
#include "prime/simulation.hpp"

namespace prime::cli {

namespace {

// Every flag stores its raw text under a config key. Values from --config
// are read first; flags given on the command line override them.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> raw;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::string config_path;
  bool drop_missing_response = false;
  CLI::Option* drop_flag = nullptr;

  CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = app->add_option(flag, raw[key], help);
    options.emplace_back(key, opt);
    return opt;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, opt] : options) out.push_back(k);
    if (drop_flag) out.push_back("drop_missing_response");
    return out;
  }

  KeyValueFile resolve(const std::vector<std::string>& extra_file_keys = {}) const {
    KeyValueFile kv;
    if (!config_path.empty()) {
      kv = KeyValueFile::load(config_path);
      auto allowed = keys();
      allowed.insert(allowed.end(), extra_file_keys.begin(), extra_file_keys.end());
      const auto unknown = kv.unknown_keys(allowed);
      if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw Error(ErrorCode::InvalidConfig, "unknown keys in '" + config_path + "': " + list);
      }
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) kv.set(key, raw.at(key));
    }
    if (drop_flag && drop_flag->count() > 0) kv.set("drop_missing_response", "true");
    return kv;
  }
};

void add_config(Command& c) {
  c.app->add_option("--config", c.config_path, "key = value file; flags override it")->check(CLI::ExistingFile);
}

void add_model_flags(Command& c) {
  c.add("--degree", "degree", "spline degree (default 3)");
  c.add("--knots", "knots", "interior knots per smooth column (default 0)");
  c.add("--placement", "placement", "knot placement: uniform|quantile");
  c.add("--bandwidth", "bandwidth", "silverman|fixed:h[,h...]");
  c.add("--projection", "projection", "none|B:normal|B:uniform");
  c.add("--projection-threshold", "projection_threshold", "project when more than this many columns are observed");
  c.add("--seed", "seed", "master seed; an entropy seed is drawn and printed when absent");
}

void add_csv_flags(Command& c) {
  c.add("--missing-token", "missing_token", "cell text marking a missing value (default NA)");
  c.drop_flag = c.app->add_flag("--drop-missing-response", c.drop_missing_response,
                                "drop rows whose response is missing");
}

std::uint64_t resolve_seed(KeyValueFile& kv, std::ostream& err) {
  if (auto s = kv.get("seed")) return parse_uint(*s);
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed = " << seed << " (entropy; pass --seed " << seed << " to reproduce)\n";
  kv.set("seed", std::to_string(seed));
  return seed;
}

SplineOptions spline_from(const KeyValueFile& kv) {
  SplineOptions s;
  if (auto v = kv.get("degree")) s.degree = static_cast<int>(parse_int(*v));
  if (auto v = kv.get("knots")) s.interior_knots = static_cast<int>(parse_int(*v));
  if (auto v = kv.get("placement")) s.placement = parse_placement(*v);
  if (s.degree < 1) throw Error(ErrorCode::InvalidConfig, "--degree must be >= 1");
  if (s.interior_knots < 0) throw Error(ErrorCode::InvalidConfig, "--knots must be >= 0");
  return s;
}

KernelConfig kernel_from(const KeyValueFile& kv, std::uint64_t seed) {
  KernelConfig k;
  if (auto v = kv.get("bandwidth")) k.bandwidth = parse_bandwidth(*v);
  if (auto v = kv.get("projection")) k.projection = parse_projection(*v);
  if (auto v = kv.get("projection_threshold")) k.projection_threshold = static_cast<int>(parse_int(*v));
  k.projection.seed = seed;
  return k;
}

CsvOptions csv_from(const KeyValueFile& kv) {
  CsvOptions o;
  if (auto v = kv.get("missing_token")) o.missing_token = *v;
  if (auto v = kv.get("drop_missing_response")) o.drop_missing_response = (*v == "true" || *v == "1");
  return o;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
  return f;
}

void write_provenance(const std::string& out_path, const KeyValueFile& kv) {
  auto f = open_output(out_path + ".provenance.txt");
  f << "# resolved configuration for " << out_path << '\n';
  kv.write(f);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
  return s;
}

template <typename Seq>
std::string join_numbers(const Seq& v) {
  std::string s;
  bool first = true;
  for (auto x : v) {
    s += (first ? "" : ",") + std::to_string(x);
    first = false;
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_fit(const Command& c, std::ostream& out, std::ostream& err) {
  auto kv = c.resolve();
  const std::uint64_t seed = resolve_seed(kv, err);
  const auto decl = load_structure(kv.require("structure"));
  const auto load = load_csv(kv.require("data"), decl, csv_from(kv));
  if (load.dropped_rows > 0) err << "note: dropped " << load.dropped_rows << " rows with a missing response\n";
  const auto spline = spline_from(kv);
  const auto kernel = kernel_from(kv, seed);
  const std::string method = kv.get("method").value_or("prime");
  const auto& table = load.table;

  PrimeFit fit;
  if (method == "prime") {
    fit = fit_prime(table, table.structure, spline, kernel);
  } else if (method == "cc") {
    fit = fit_cc(table, table.structure, spline);
  } else if (method == "mean_impute") {
    fit = fit_mean_impute(table, table.structure, spline);
  } else {
    throw Error(ErrorCode::InvalidConfig, "--method must be prime, cc or mean_impute, got '" + method + "'");
  }

  {
    auto f = open_output(kv.require("fit_out"));
    write_fit(fit, f, kv);
  }

  const auto& d = fit.diagnostics;
  KeyValueFile report;
  report.set("method", to_string(fit.method));
  report.set("n", std::to_string(d.n));
  report.set("rank", std::to_string(d.rank));
  report.set("structural_rank", std::to_string(d.structural_rank));
  report.set("rank_deficient", d.rank_deficient ? "true" : "false");
  report.set("condition_estimate", format_double(d.condition_estimate));
  report.set("rss", format_double(d.rss));
  report.set("imputed_values", std::to_string(d.imputation.imputed_values));
  report.set("imputed_rows", std::to_string(d.imputation.imputed_rows));
  report.set("projected_units", std::to_string(d.imputation.projected_units));
  report.set("degenerate_bandwidths", std::to_string(d.imputation.degenerate_bandwidths));
  report.set("linear_fallbacks", join_numbers(d.imputation.linear_fallbacks));
  report.set("basis_fallbacks", join_numbers(d.imputation.basis_fallbacks));
  report.set("intercept", format_double(fit.intercept));
  for (std::size_t k = 0; k < fit.q(); ++k) {
    report.set("beta." + fit.column_names[fit.structure.linear[k]], format_double(fit.beta(static_cast<Eigen::Index>(k))));
  }
  report.write(out);

  if (d.rank_deficient) {
    err << "warning: design rank " << d.rank << " is below the structural rank " << d.structural_rank << '\n';
  }
  if (d.imputation.total_fallbacks() > 0) {
    err << "warning: " << d.imputation.total_fallbacks() << " imputations fell back to the observed mean\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

Matrix read_prediction_rows(const std::string& path, const std::vector<std::string>& columns,
                            const std::string& missing_token) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedCsv, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) return Matrix(0, static_cast<Eigen::Index>(columns.size()));
  const auto header = split_csv_line(line);
  std::vector<std::size_t> index;
  for (const auto& name : columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::StructureMismatch, "column '" + name + "' not in '" + path + "'");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, path + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(header.size()) + " cells");
    }
    std::vector<double> row;
    for (std::size_t j : index) {
      const std::string cell = trim(cells[j]);
      if (cell.empty() || cell == missing_token) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        row.push_back(parse_double(cell));
      } catch (const Error&) {
        throw Error(ErrorCode::MalformedCsv,
                    path + ":" + std::to_string(lineno) + ": column '" + header[j] + "' is not numeric");
      }
    }
    rows.push_back(std::move(row));
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return x;
}

int cmd_predict(const Command& c, std::ostream& out, std::ostream&) {
  const auto kv = c.resolve();
  const auto fit = read_fit_file(kv.require("fit"));
  const auto x = read_prediction_rows(kv.require("data"), fit.column_names, csv_from(kv).missing_token);
  const Vector mu = x.rows() > 0 ? predict(fit, x) : Vector();

  std::ostringstream csv;
  csv << "mu_hat\n";
  for (Eigen::Index i = 0; i < mu.size(); ++i) csv << format_double(mu(i)) << '\n';
  if (auto path = kv.get("out")) {
    auto f = open_output(*path);
    f << csv.str();
    write_provenance(*path, kv);
  } else {
    out << csv.str();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_average(const Command& c, std::ostream& out, std::ostream& err) {
  auto kv = c.resolve();
  const std::uint64_t seed = resolve_seed(kv, err);
  const std::string data = kv.require("data");
  StructureDecl decl;
  if (auto s = kv.get("structure")) {
    const auto given = load_structure(*s);
    decl.response = given.response;
    decl.linear = given.covariates();
  } else {
    decl.response = kv.require("response");
    for (const auto& name : read_csv_header(data)) {
      if (name != decl.response) decl.linear.push_back(name);
    }
  }
  const auto load = load_csv(data, decl, csv_from(kv));
  if (load.dropped_rows > 0) err << "note: dropped " << load.dropped_rows << " rows with a missing response\n";
  const auto& table = load.table;
  const auto ma = fit_prime_ma(table, spline_from(kv), kernel_from(kv, seed));

  KeyValueFile report;
  report.set("candidates", join(table.column_names));
  for (std::size_t k = 0; k < ma.candidates.size(); ++k) {
    report.set("weight." + table.column_names[ma.candidates[k].column],
               format_double(ma.weights.w(static_cast<Eigen::Index>(k))));
  }
  report.set("n0", std::to_string(ma.n0));
  report.set("cv_rows", std::to_string(ma.cv_rows));
  report.set("dropped_rows", join_numbers(ma.dropped_rows));
  report.set("objective", format_double(ma.weights.objective));
  report.set("kkt_gap", format_double(ma.weights.kkt_gap));
  report.set("iterations", std::to_string(ma.weights.iterations));
  report.set("uniform_fallback", ma.uniform_fallback ? "true" : "false");
  for (std::size_t k = 0; k < ma.warnings.size(); ++k) report.set("warning." + std::to_string(k), ma.warnings[k]);
  for (const auto& [k, v] : kv.entries()) report.set("config." + k, v);
  for (const auto& w : ma.warnings) err << "warning: " << w << '\n';

  if (auto path = kv.get("report")) {
    auto f = open_output(*path);
    report.write(f);
  } else {
    report.write(out);
  }

  if (auto path = kv.get("out")) {
    const auto cases = complete_case_subset(table);
    Matrix rows(static_cast<Eigen::Index>(cases.n0()), table.x.cols());
    for (std::size_t i = 0; i < cases.n0(); ++i) {
      rows.row(static_cast<Eigen::Index>(i)) = table.x.row(static_cast<Eigen::Index>(cases.rows[i]));
    }
    const Vector mu = cases.n0() > 0 ? ma.predict(rows) : Vector();
    auto f = open_output(*path);
    f << "row,mu_hat\n";
    for (std::size_t i = 0; i < cases.n0(); ++i) {
      f << cases.rows[i] << ',' << format_double(mu(static_cast<Eigen::Index>(i))) << '\n';
    }
    write_provenance(*path, kv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Command& c, std::ostream& out, std::ostream& err) {
  auto kv = c.resolve(sim::scenario_keys());
  resolve_seed(kv, err);
  if (!kv.has("workers")) kv.set("workers", std::to_string(std::max(1u, std::thread::hardware_concurrency())));
  const std::string summary_path = kv.require("out");
  std::string long_path = kv.get("long_out").value_or("");
  if (long_path.empty()) {
    long_path = summary_path;
    if (long_path.size() > 4 && long_path.ends_with(".csv")) long_path.resize(long_path.size() - 4);
    long_path += ".long.csv";
  }

  KeyValueFile scenario;
  for (const auto& [k, v] : kv.entries()) {
    if (k != "out" && k != "long_out") scenario.set(k, v);
  }
  const auto configs = sim::parse_scenarios(scenario);
  const auto methods = sim::parse_methods(kv.get("methods").value_or("prime,prime_ma,cc,mean_impute"));
  const auto workers = static_cast<std::size_t>(parse_uint(kv.require("workers")));

  std::vector<sim::MetricsReport> reports;
  for (const auto& config : configs) {
    reports.push_back(sim::run_study(config, methods, workers));
    const auto& rep = reports.back();
    out << "R^2 = " << format_double(config.r_squared) << ": sigma^2 = " << format_double(rep.sigma2)
        << ", incomplete rows = " << format_double(rep.mean_incomplete_fraction) << '\n';
    for (const auto& s : rep.summaries) {
      out << "  " << sim::to_string(s.method) << ": PE = " << (s.successes ? format_double(s.pe) : "NA")
          << " (sd " << format_double(s.pe_sd) << "), " << s.successes << " ok, " << s.failures << " failed\n";
      if (s.failures > 0) {
        err << "warning: " << sim::to_string(s.method) << " failed in " << s.failures << " of "
            << config.replications << " replications at R^2 = " << format_double(config.r_squared) << '\n';
      }
    }
  }

  {
    auto f = open_output(summary_path);
    sim::write_summary_csv(reports, f);
  }
  {
    auto f = open_output(long_path);
    sim::write_long_csv(reports, f);
  }
  KeyValueFile provenance = kv;
  provenance.set("long_out", long_path);
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const std::string prefix = "result." + std::to_string(r) + ".";
    provenance.set(prefix + "r_squared", format_double(reports[r].config.r_squared));
    provenance.set(prefix + "sigma2", format_double(reports[r].sigma2));
    provenance.set(prefix + "incomplete_fraction", format_double(reports[r].mean_incomplete_fraction));
  }
  write_provenance(summary_path, provenance);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SummaryCell {
  double pe = 0.0;
  std::string se;
  bool available = false;
};

struct Setting {
  std::vector<std::string> fields;  // scenario, error, n, rho, mr, r_squared
  std::map<std::string, SummaryCell> cells;
};

int cmd_report(const Command& c, const std::vector<std::string>& inputs, std::ostream& out, std::ostream& err) {
  const auto kv = c.resolve();
  if (inputs.empty()) throw Error(ErrorCode::InvalidConfig, "report needs at least one summary CSV");
  std::vector<Setting> settings;
  std::map<std::string, std::size_t> setting_index;
  std::vector<std::string> methods;

  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MalformedCsv, "cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (trim(line) != sim::kSummaryHeader) {
      throw Error(ErrorCode::MalformedCsv, "'" + path + "' does not have the summary CSV header");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 12) {
        throw Error(ErrorCode::MalformedCsv, path + ":" + std::to_string(lineno) + ": expected 12 fields");
      }
      if (f[7] != "PE") continue;
      const std::vector<std::string> key_fields(f.begin(), f.begin() + 6);
      const std::string key = join(key_fields);
      auto [it, inserted] = setting_index.emplace(key, settings.size());
      if (inserted) settings.push_back({key_fields, {}});
      auto& setting = settings[it->second];
      if (setting.cells.contains(f[6])) {
        throw Error(ErrorCode::MalformedCsv, path + ":" + std::to_string(lineno) + ": duplicate PE for method '" +
                                                 f[6] + "' in setting " + key);
      }
      SummaryCell cell;
      if (f[8] != "NA") {
        try {
          cell.pe = parse_double(f[8]);
        } catch (const Error&) {
          throw Error(ErrorCode::MalformedCsv, path + ":" + std::to_string(lineno) + ": PE is not numeric");
        }
        cell.se = f[9];
        cell.available = true;
      }
      setting.cells[f[6]] = cell;
      if (std::find(methods.begin(), methods.end(), f[6]) == methods.end()) methods.push_back(f[6]);
    }
  }

  std::ostringstream md;
  md << "| scenario | error | n | rho | MR | R^2 |";
  for (const auto& m : methods) md << ' ' << m << " |";
  md << "\n|---|---|---|---|---|---|";
  for (std::size_t k = 0; k < methods.size(); ++k) md << "---|";
  md << '\n';
  for (const auto& s : settings) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [m, cell] : s.cells) {
      if (cell.available) best = std::min(best, cell.pe);
    }
    md << '|';
    for (const auto& f : s.fields) md << ' ' << f << " |";
    for (const auto& m : methods) {
      const auto it = s.cells.find(m);
      if (it == s.cells.end() || !it->second.available) {
        md << " NA |";
        continue;
      }
      const std::string pe = format_double(it->second.pe);
      md << ' ' << (it->second.pe == best ? "**" + pe + "**" : pe);
      if (!it->second.se.empty()) md << " (" << it->second.se << ')';
      md << " |";
    }
    md << '\n';
  }

  KeyValueFile provenance = kv;
  provenance.set("inputs", join(inputs));
  if (auto path = kv.get("out")) {
    auto f = open_output(*path);
    f << md.str();
    write_provenance(*path, provenance);
  } else {
    out << md.str();
  }

  if (auto path = kv.get("ratio_out")) {
    auto f = open_output(*path);
    f << "scenario,error,n,rho,mr,r_squared,method,pe_ratio\n";
    for (const auto& s : settings) {
      const auto base = s.cells.find("prime");
      if (base == s.cells.end() || !base->second.available || !(base->second.pe > 0.0)) {
        err << "warning: no PRIME baseline for setting " << join(s.fields) << "; ratios skipped\n";
        continue;
      }
      for (const auto& m : methods) {
        const auto it = s.cells.find(m);
        if (it == s.cells.end() || !it->second.available) continue;
        f << join(s.fields) << ',' << m << ',' << format_double(it->second.pe / base->second.pe) << '\n';
      }
    }
    write_provenance(*path, provenance);
  }
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Numerical: return kExitNumerical;
  }
  return kExitInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PRIME: spline fits of additive partially linear models with missing covariates"};
  app.name("prime");
  app.require_subcommand(1);

  Command fit;
  fit.app = app.add_subcommand("fit", "fit one model and write a fit file");
  add_config(fit);
  fit.add("--data", "data", "input CSV")->check(CLI::ExistingFile);
  fit.add("--structure", "structure", "structure file (response, nonlinear, linear)")->check(CLI::ExistingFile);
  fit.add("--fit-out", "fit_out", "fit file to write");
  fit.add("--method", "method", "prime|cc|mean_impute (default prime)");
  add_model_flags(fit);
  add_csv_flags(fit);

  Command pred;
  pred.app = app.add_subcommand("predict", "predict the mean for complete rows");
  add_config(pred);
  pred.add("--fit", "fit", "fit file")->check(CLI::ExistingFile);
  pred.add("--data", "data", "CSV holding the fitted covariate columns")->check(CLI::ExistingFile);
  pred.add("--out", "out", "predictions CSV (default stdout)");
  pred.add("--missing-token", "missing_token", "cell text marking a missing value (default NA)");

  Command avg;
  avg.app = app.add_subcommand("average", "model-averaged fit over one-smooth-column candidates");
  add_config(avg);
  avg.add("--data", "data", "input CSV")->check(CLI::ExistingFile);
  avg.add("--response", "response", "response column; every other column is a covariate");
  avg.add("--structure", "structure", "structure file naming the response and covariates")->check(CLI::ExistingFile);
  avg.add("--out", "out", "predictions CSV for the complete rows");
  avg.add("--report", "report", "weights report (default stdout)");
  add_model_flags(avg);
  add_csv_flags(avg);

  Command simc;
  simc.app = app.add_subcommand("simulate", "run a Monte Carlo study");
  add_config(simc);
  simc.add("--out", "out", "summary CSV");
  simc.add("--long-out", "long_out", "per-replication CSV (default <out stem>.long.csv)");
  simc.add("--methods", "methods", "comma list of prime,prime_ma,cc,mean_impute");
  simc.add("--workers", "workers", "worker threads (default: available cores)");
  simc.add("--replications", "replications", "number of replications");
  simc.add("--n", "n", "training sample size");
  add_model_flags(simc);

  Command rep;
  std::vector<std::string> inputs;
  rep.app = app.add_subcommand("report", "merge summary CSVs into a Markdown table");
  add_config(rep);
  rep.app->add_option("inputs", inputs, "summary CSVs")->required()->check(CLI::ExistingFile);
  rep.add("--out", "out", "Markdown output (default stdout)");
  rep.add("--ratio-out", "ratio_out", "long CSV of PE ratios against PRIME");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit.app->parsed()) return cmd_fit(fit, out, err);
    if (pred.app->parsed()) return cmd_predict(pred, out, err);
    if (avg.app->parsed()) return cmd_average(avg, out, err);
    if (simc.app->parsed()) return cmd_simulate(simc, out, err);
    if (rep.app->parsed()) return cmd_report(rep, inputs, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace prime::cli
