#include "prime/fit_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "prime/errors.hpp"

namespace prime {

namespace {

template <typename Seq>
std::string join_doubles(const Seq& values) {
  std::string s;
  bool first = true;
  for (double v : values) {
    if (!first) s += ',';
    s += format_double(v);
    first = false;
  }
  return s;
}

std::string join_indices(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) s += (k ? "," : "") + std::to_string(values[k]);
  return s;
}

std::string join_names(const std::vector<std::string>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) s += (k ? "," : "") + values[k];
  return s;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& cell : split_list(text)) out.push_back(parse_double(cell));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& cell : split_list(text)) out.push_back(static_cast<std::size_t>(parse_uint(cell)));
  return out;
}

}  // namespace

std::string format_bandwidth(const BandwidthRule& rule) {
  if (rule.kind == BandwidthRule::Kind::Silverman) return "silverman";
  return "fixed:" + join_doubles(rule.fixed);
}

BandwidthRule parse_bandwidth(const std::string& text) {
  const std::string t = trim(text);
  if (t == "silverman") return BandwidthRule::silverman();
  if (t.rfind("fixed:", 0) == 0) {
    BandwidthRule rule{BandwidthRule::Kind::Fixed, parse_doubles(t.substr(6))};
    if (rule.fixed.empty()) throw Error(ErrorCode::InvalidConfig, "fixed bandwidth needs values");
    for (double h : rule.fixed) {
      if (!(h > 0.0)) throw Error(ErrorCode::InvalidConfig, "bandwidths must be positive");
    }
    return rule;
  }
  throw Error(ErrorCode::InvalidConfig, "bandwidth must be 'silverman' or 'fixed:<h,...>', got '" + t + "'");
}

std::string format_projection(const ProjectionConfig& projection) {
  if (!projection.enabled) return "none";
  return std::to_string(projection.directions) + ":" +
         (projection.dist == DirectionDist::StandardNormal ? "normal" : "uniform");
}

ProjectionConfig parse_projection(const std::string& text) {
  const std::string t = trim(text);
  ProjectionConfig p;
  if (t == "none") {
    p.enabled = false;
    return p;
  }
  const auto colon = t.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "projection must be 'none' or 'B:dist', got '" + t + "'");
  }
  p.enabled = true;
  p.directions = static_cast<int>(parse_int(t.substr(0, colon)));
  const std::string dist = trim(t.substr(colon + 1));
  if (dist == "normal") {
    p.dist = DirectionDist::StandardNormal;
  } else if (dist == "uniform") {
    p.dist = DirectionDist::ScaledUniform;
  } else {
    throw Error(ErrorCode::InvalidConfig, "projection distribution must be normal or uniform, got '" + dist + "'");
  }
  if (p.directions < 1) throw Error(ErrorCode::InvalidConfig, "projection needs B >= 1");
  return p;
}

std::string format_placement(KnotPlacement placement) {
  return placement == KnotPlacement::Uniform ? "uniform" : "quantile";
}

KnotPlacement parse_placement(const std::string& text) {
  const std::string t = trim(text);
  if (t == "uniform") return KnotPlacement::Uniform;
  if (t == "quantile") return KnotPlacement::Quantile;
  throw Error(ErrorCode::InvalidConfig, "knot placement must be uniform or quantile, got '" + t + "'");
}

void write_fit(const PrimeFit& fit, std::ostream& out, const KeyValueFile& provenance) {
  KeyValueFile kv;
  kv.set("method", to_string(fit.method));
  kv.set("response", fit.response_name);
  kv.set("columns", join_names(fit.column_names));
  kv.set("nonlinear", join_indices(fit.structure.nonlinear));
  kv.set("linear", join_indices(fit.structure.linear));
  kv.set("degree", std::to_string(fit.spline_options.degree));
  kv.set("interior_knots", std::to_string(fit.spline_options.interior_knots));
  kv.set("placement", format_placement(fit.spline_options.placement));
  kv.set("bandwidth", format_bandwidth(fit.kernel_config.bandwidth));
  kv.set("projection", format_projection(fit.kernel_config.projection));
  kv.set("projection_seed", std::to_string(fit.kernel_config.projection.seed));
  kv.set("projection_threshold", std::to_string(fit.kernel_config.projection_threshold));
  kv.set("intercept", format_double(fit.intercept));
  for (std::size_t k = 0; k < fit.p(); ++k) {
    const std::string key = std::to_string(k);
    const std::size_t col = fit.structure.nonlinear[k];
    const auto& r = fit.normalization.range_for(col);
    const auto L = fit.specs[k].basis_size();
    kv.set("knots." + key, join_doubles(fit.specs[k].knots));
    kv.set("range." + key, format_double(r.min) + "," + format_double(r.max));
    kv.set("means." + key, join_doubles(fit.centering_means.row(static_cast<Eigen::Index>(k)).head(L)));
    kv.set("b." + key, join_doubles(fit.b[k]));
  }
  kv.set("beta", join_doubles(fit.beta));
  const auto& d = fit.diagnostics;
  kv.set("diag.n", std::to_string(d.n));
  kv.set("diag.rank", std::to_string(d.rank));
  kv.set("diag.structural_rank", std::to_string(d.structural_rank));
  kv.set("diag.rank_deficient", d.rank_deficient ? "true" : "false");
  kv.set("diag.condition_estimate", format_double(d.condition_estimate));
  kv.set("diag.rss", format_double(d.rss));
  kv.set("diag.imputed_values", std::to_string(d.imputation.imputed_values));
  kv.set("diag.imputed_rows", std::to_string(d.imputation.imputed_rows));
  kv.set("diag.projected_units", std::to_string(d.imputation.projected_units));
  kv.set("diag.degenerate_bandwidths", std::to_string(d.imputation.degenerate_bandwidths));
  kv.set("diag.linear_fallbacks", join_indices(d.imputation.linear_fallbacks));
  kv.set("diag.basis_fallbacks", join_indices(d.imputation.basis_fallbacks));
  for (const auto& [k, v] : provenance.entries()) kv.set("config." + k, v);

  out << kFitMagic << '\n';
  kv.write(out);
}

PrimeFit read_fit(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (trim(magic) != kFitMagic) {
    throw Error(ErrorCode::MalformedFitFile, "missing '" + std::string(kFitMagic) + "' header");
  }
  try {
    const auto kv = KeyValueFile::parse(in, "fit file");
    PrimeFit fit;
    const std::string method = kv.require("method");
    if (method == "prime") {
      fit.method = FitMethod::Prime;
    } else if (method == "cc") {
      fit.method = FitMethod::CompleteCase;
    } else if (method == "mean_impute") {
      fit.method = FitMethod::MeanImpute;
    } else {
      throw Error(ErrorCode::MalformedFitFile, "unknown method '" + method + "'");
    }
    fit.response_name = kv.require("response");
    fit.column_names = split_list(kv.require("columns"));
    fit.structure.nonlinear = parse_indices(kv.require("nonlinear"));
    fit.structure.linear = parse_indices(kv.require("linear"));
    fit.structure.validate(fit.column_names.size());
    fit.spline_options.degree = static_cast<int>(parse_int(kv.require("degree")));
    fit.spline_options.interior_knots = static_cast<int>(parse_int(kv.require("interior_knots")));
    fit.spline_options.placement = parse_placement(kv.require("placement"));
    fit.kernel_config.bandwidth = parse_bandwidth(kv.require("bandwidth"));
    fit.kernel_config.projection = parse_projection(kv.require("projection"));
    fit.kernel_config.projection.seed = parse_uint(kv.require("projection_seed"));
    fit.kernel_config.projection_threshold = static_cast<int>(parse_int(kv.require("projection_threshold")));
    fit.intercept = parse_double(kv.require("intercept"));

    std::vector<ColumnRange> ranges;
    int max_L = 0;
    std::vector<std::vector<double>> means;
    for (std::size_t k = 0; k < fit.p(); ++k) {
      const std::string key = std::to_string(k);
      fit.specs.push_back(spec_from_knots(fit.spline_options.degree, parse_doubles(kv.require("knots." + key))));
      const auto L = fit.specs.back().basis_size();
      max_L = std::max(max_L, L);
      const auto range = parse_doubles(kv.require("range." + key));
      if (range.size() != 2) throw Error(ErrorCode::MalformedFitFile, "range." + key + " needs two values");
      ranges.push_back({fit.structure.nonlinear[k], range[0], range[1]});
      means.push_back(parse_doubles(kv.require("means." + key)));
      const auto b = parse_doubles(kv.require("b." + key));
      if (static_cast<int>(b.size()) != L || static_cast<int>(means.back().size()) != L) {
        throw Error(ErrorCode::MalformedFitFile, "block " + key + " length disagrees with its knot vector");
      }
      fit.b.push_back(to_vector(b));
    }
    fit.normalization = NormalizationMap(std::move(ranges));
    fit.centering_means = Matrix::Zero(static_cast<Eigen::Index>(fit.p()), max_L);
    for (std::size_t k = 0; k < means.size(); ++k) {
      for (std::size_t l = 0; l < means[k].size(); ++l) {
        fit.centering_means(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = means[k][l];
      }
    }
    fit.beta = to_vector(parse_doubles(kv.get("beta").value_or("")));
    if (static_cast<std::size_t>(fit.beta.size()) != fit.q()) {
      throw Error(ErrorCode::MalformedFitFile, "beta length disagrees with the linear columns");
    }
    auto& d = fit.diagnostics;
    d.n = static_cast<std::size_t>(parse_uint(kv.require("diag.n")));
    d.rank = static_cast<Eigen::Index>(parse_int(kv.require("diag.rank")));
    d.structural_rank = static_cast<Eigen::Index>(parse_int(kv.require("diag.structural_rank")));
    d.rank_deficient = kv.require("diag.rank_deficient") == "true";
    d.condition_estimate = parse_double(kv.require("diag.condition_estimate"));
    d.rss = parse_double(kv.require("diag.rss"));
    d.imputation.imputed_values = static_cast<std::size_t>(parse_uint(kv.require("diag.imputed_values")));
    d.imputation.imputed_rows = static_cast<std::size_t>(parse_uint(kv.require("diag.imputed_rows")));
    d.imputation.projected_units = static_cast<std::size_t>(parse_uint(kv.require("diag.projected_units")));
    d.imputation.degenerate_bandwidths =
        static_cast<std::size_t>(parse_uint(kv.require("diag.degenerate_bandwidths")));
    d.imputation.linear_fallbacks = parse_indices(kv.require("diag.linear_fallbacks"));
    d.imputation.basis_fallbacks = parse_indices(kv.require("diag.basis_fallbacks"));
    return fit;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedFitFile) throw;
    throw Error(ErrorCode::MalformedFitFile, e.what());
  }
}

PrimeFit read_fit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedFitFile, "cannot open '" + path + "'");
  return read_fit(in);
}

}  // namespace prime
