// vfpanel: batch pipeline from hourly zonal electricity data to value-factor
// panel estimates, conditional effects, and sensitivity sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vfp/common.hpp"
#include "vfp/effects.hpp"
#include "vfp/estimate.hpp"
#include "vfp/pipeline.hpp"
#include "vfp/provenance.hpp"
#include "vfp/sensitivity.hpp"
#include "vfp/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string config_path;
  std::string output_dir;
  unsigned threads = 1;
  // model overrides
  std::string technology, estimator, aggregation, weights, controls;
  int hac_lags = INT32_MIN;
  // synth overrides
  std::int64_t seed = INT64_MIN;
  std::string sens_mode;
  std::string synth_mode;
};

json load_config(const Options& opt) {
  json cfg = json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw vfp::ConfigError("cannot open config: " + opt.config_path);
    try {
      in >> cfg;
    } catch (const json::parse_error& e) {
      throw vfp::ConfigError("config parse error: " + std::string(e.what()));
    }
  }
  if (!cfg.is_object()) throw vfp::ConfigError("config root must be an object");
  return cfg;
}

// Flags override the config document; the merged result is what lands in
// provenance.json.
json resolve_config(const Options& opt, json cfg) {
  json& model = cfg["model"];
  if (!model.is_object()) model = json::object();
  if (!opt.technology.empty()) model["technology"] = opt.technology;
  if (!opt.estimator.empty()) model["estimator"] = opt.estimator;
  if (!opt.aggregation.empty()) model["aggregation"] = opt.aggregation;
  if (!opt.weights.empty()) model["weights_scheme"] = opt.weights;
  if (!opt.controls.empty()) model["controls"] = opt.controls;
  if (opt.hac_lags != INT32_MIN) model["hac_lags"] = opt.hac_lags;
  if (opt.seed != INT64_MIN) {
    cfg["synth_panel"]["seed"] = opt.seed;
    cfg["synth_hourly"]["seed"] = opt.seed;
  }
  if (!opt.output_dir.empty()) cfg["output_dir"] = opt.output_dir;
  if (!cfg.contains("output_dir")) cfg["output_dir"] = "out";
  return cfg;
}

vfp::ModelSpec model_spec(const json& cfg) {
  return cfg.contains("model") ? vfp::spec_from_json(cfg.at("model"))
                               : vfp::ModelSpec{};
}

struct DataPaths {
  std::vector<fs::path> hourly, exchanges;
  fs::path topology, fuel, hydro;

  std::vector<fs::path> all() const {
    std::vector<fs::path> out = hourly;
    out.insert(out.end(), exchanges.begin(), exchanges.end());
    out.push_back(topology);
    out.push_back(fuel);
    out.push_back(hydro);
    return out;
  }
};

DataPaths data_paths(const json& cfg) {
  if (!cfg.contains("data"))
    throw vfp::ConfigError("config lacks a \"data\" section");
  const json& d = cfg.at("data");
  auto list = [&](const char* key) {
    std::vector<fs::path> out;
    if (!d.contains(key))
      throw vfp::ConfigError(std::string("data section lacks \"") + key + "\"");
    if (d.at(key).is_string()) {
      out.emplace_back(d.at(key).get<std::string>());
    } else {
      for (const auto& p : d.at(key)) out.emplace_back(p.get<std::string>());
    }
    return out;
  };
  DataPaths paths;
  paths.hourly = list("hourly");
  paths.exchanges = list("exchanges");
  paths.topology = d.at("topology").get<std::string>();
  paths.fuel = d.at("fuel_prices").get<std::string>();
  paths.hydro = d.at("hydro_capacities").get<std::string>();
  for (const auto& p : paths.all())
    if (!fs::exists(p))
      throw vfp::DataError("input file missing: " + p.string());
  return paths;
}

vfp::Dataset load_dataset(const DataPaths& paths, unsigned threads) {
  vfp::Dataset data;
  vfp::ZoneTopology topo = vfp::ZoneTopology::parse_file(paths.topology);
  vfp::LoadPaths lp;
  lp.hourly = paths.hourly;
  lp.exchanges = paths.exchanges;
  data.store = vfp::HourlyStore::load(lp, std::move(topo), threads);
  data.fuel = vfp::FuelPriceSeries::load_csv(paths.fuel);
  data.hydro = vfp::HydroCapacityTable::load_csv(paths.hydro);
  return data;
}

/// Panel input either via the full pipeline or from a pre-built table
/// ("panel_input" key), e.g. one written by `synth panel`.
struct PanelSource {
  vfp::PanelInput input;
  std::optional<vfp::PipelineResult> pipeline;
  std::vector<fs::path> inputs;  // for provenance
};

PanelSource panel_source(const json& cfg, const vfp::ModelSpec& spec,
                         unsigned threads) {
  PanelSource src;
  if (cfg.contains("panel_input")) {
    fs::path p = cfg.at("panel_input").get<std::string>();
    if (!fs::exists(p)) throw vfp::DataError("input file missing: " + p.string());
    src.input = vfp::PanelInput::load_csv(p);
    src.inputs.push_back(p);
    return src;
  }
  DataPaths paths = data_paths(cfg);
  vfp::Dataset data = load_dataset(paths, threads);
  src.pipeline = vfp::run_pipeline(data, spec, threads);
  src.input = src.pipeline->input;
  src.inputs = paths.all();
  return src;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

fs::path out_dir(const json& cfg) {
  fs::path dir = cfg.at("output_dir").get<std::string>();
  fs::create_directories(dir);
  return dir;
}

vfp::DgpConfig dgp_from_json(const json& cfg) {
  vfp::DgpConfig c;
  if (!cfg.contains("synth_panel")) return c;
  const json& j = cfg.at("synth_panel");
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key);
  };
  get("n_zones", c.n_zones);
  get("min_periods", c.min_periods);
  get("max_periods", c.max_periods);
  get("start_year", c.start_year);
  get("seed", c.seed);
  get("rho", c.rho);
  get("sigma", c.sigma);
  get("pen_base_mean", c.pen_base_mean);
  get("pen_base_sd", c.pen_base_sd);
  get("pen_within_sd", c.pen_within_sd);
  get("pen_ar", c.pen_ar);
  get("extra_edges", c.extra_edges);
  if (j.contains("controls"))
    c.controls = vfp::parse_control_set(j.at("controls").get<std::string>());
  if (j.contains("beta"))
    for (const auto& [k, v] : j.at("beta").items())
      c.beta[k] = v.get<double>();
  return c;
}

vfp::MeritOrderConfig merit_from_json(const json& cfg) {
  vfp::MeritOrderConfig c;
  if (!cfg.contains("synth_hourly")) return c;
  const json& j = cfg.at("synth_hourly");
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key);
  };
  get("n_zones", c.n_zones);
  get("n_days", c.n_days);
  get("start_year", c.start_year);
  get("seed", c.seed);
  get("supply_intercept_lo", c.supply_intercept_lo);
  get("supply_intercept_hi", c.supply_intercept_hi);
  get("supply_slope_lo", c.supply_slope_lo);
  get("supply_slope_hi", c.supply_slope_hi);
  get("base_load_lo", c.base_load_lo);
  get("base_load_hi", c.base_load_hi);
  get("wind_cap_frac_lo", c.wind_cap_frac_lo);
  get("wind_cap_frac_hi", c.wind_cap_frac_hi);
  get("solar_cap_frac_lo", c.solar_cap_frac_lo);
  get("solar_cap_frac_hi", c.solar_cap_frac_hi);
  get("wind_common_weight", c.wind_common_weight);
  get("solar_common_weight", c.solar_common_weight);
  get("ic_frac_lo", c.ic_frac_lo);
  get("ic_frac_hi", c.ic_frac_hi);
  get("extra_edges", c.extra_edges);
  if (j.contains("price_floor")) c.price_floor = j.at("price_floor").get<double>();
  if (j.contains("max_supply_frac"))
    c.max_supply_frac = j.at("max_supply_frac").get<double>();
  return c;
}

// --- commands --------------------------------------------------------------

int cmd_ingest(const json& cfg, unsigned threads) {
  DataPaths paths = data_paths(cfg);
  vfp::Dataset data = load_dataset(paths, threads);
  fs::path dir = out_dir(cfg);
  {
    std::ofstream out(dir / "load_report.json", std::ios::binary);
    out << data.store.report().to_json().dump(2) << '\n';
  }
  vfp::write_provenance(dir, cfg, paths.all());
  std::cout << "rows retained: " << data.store.total_rows()
            << ", rejections: " << data.store.report().rejections.size()
            << '\n';
  return kExitOk;
}

int cmd_metrics(const json& cfg, unsigned threads) {
  DataPaths paths = data_paths(cfg);
  vfp::Dataset data = load_dataset(paths, threads);
  vfp::ModelSpec spec = model_spec(cfg);
  vfp::PipelineResult pr = vfp::run_pipeline(data, spec, threads);
  fs::path dir = out_dir(cfg);
  pr.metrics.emit(dir / "metrics.csv");
  pr.metrics.ic.emit(dir / "ic_edges.csv");
  pr.weights.emit(dir / "weights.csv");
  pr.input.emit(dir / "panel_input.csv");
  print_warnings(pr.input.warnings);
  vfp::write_provenance(dir, cfg, paths.all());
  std::cout << "metrics rows: " << pr.metrics.rows.size() << '\n';
  return kExitOk;
}

int cmd_fit(const json& cfg, unsigned threads) {
  vfp::ModelSpec spec = model_spec(cfg);
  PanelSource src = panel_source(cfg, spec, threads);
  vfp::DesignMatrix design = vfp::assemble_design(spec, src.input);
  vfp::ModelResult result = vfp::fit(spec, design);
  fs::path dir = out_dir(cfg);
  std::string stem = std::string("model_") +
                     std::string(vfp::tech_name(spec.technology)) + "_" +
                     std::string(vfp::estimator_name(spec.estimator));
  result.write_json(dir / (stem + ".json"));
  {
    std::ofstream out(dir / (stem + ".txt"), std::ios::binary);
    out << result.to_table();
  }
  design.emit(dir / "design.csv");
  print_warnings(result.warnings);
  vfp::write_provenance(dir, cfg, src.inputs);
  std::cout << stem << ": n=" << result.n_obs
            << " adj_r2=" << vfp::format_double(result.adj_r2) << '\n';
  return kExitOk;
}

int cmd_effects(const json& cfg, unsigned threads) {
  vfp::ModelSpec spec = model_spec(cfg);
  PanelSource src = panel_source(cfg, spec, threads);
  vfp::DesignMatrix design = vfp::assemble_design(spec, src.input);
  vfp::ModelResult result = vfp::fit(spec, design);
  int grid = 41;
  if (cfg.contains("effects") && cfg.at("effects").contains("grid_points"))
    grid = cfg.at("effects").at("grid_points").get<int>();
  fs::path dir = out_dir(cfg);
  auto curves = vfp::moderator_curves(result, design, grid);
  vfp::emit_curves(curves, dir / "curves.csv");
  // Zone-level effects need per-zone IC values from the pipeline.
  if (src.pipeline) {
    std::map<std::string, double> ic = src.pipeline->metrics.ic.zone_normalized;
    vfp::ZoneEffectsResult ze = vfp::zone_effects(result, ic);
    ze.emit(dir / "zone_effects.csv");
    print_warnings(ze.warnings);
  } else {
    std::map<std::string, double> ic;
    for (const auto& r : src.input.rows)
      ic[src.input.zone_ids[r.zone]] = r.ic;
    vfp::ZoneEffectsResult ze = vfp::zone_effects(result, ic);
    ze.emit(dir / "zone_effects.csv");
    print_warnings(ze.warnings);
  }
  vfp::write_provenance(dir, cfg, src.inputs);
  std::cout << "curves: " << curves.size() << '\n';
  return kExitOk;
}

int cmd_sensitivity(const json& cfg, const std::string& mode,
                    unsigned threads) {
  vfp::ModelSpec spec = model_spec(cfg);
  fs::path dir = out_dir(cfg);
  if (mode == "loo") {
    PanelSource src = panel_source(cfg, spec, threads);
    vfp::LooResult r = vfp::leave_one_out(spec, src.input, threads);
    r.emit(dir / "sensitivity_loo.csv");
    vfp::write_provenance(dir, cfg, src.inputs);
    std::cout << "loo runs: " << r.runs.size() << '\n';
    return kExitOk;
  }
  if (mode == "estimators") {
    PanelSource src = panel_source(cfg, spec, threads);
    vfp::EstimatorComparison r = vfp::estimator_comparison(spec, src.input);
    r.emit(dir / "sensitivity_estimators.csv");
    vfp::write_provenance(dir, cfg, src.inputs);
    std::cout << "max within-coefficient rel dev: "
              << vfp::format_double(r.max_rel_dev) << '\n';
    return kExitOk;
  }
  // The remaining harnesses recompute metrics from the hourly store.
  DataPaths paths = data_paths(cfg);
  vfp::Dataset data = load_dataset(paths, threads);
  if (mode == "aggregation") {
    std::vector<vfp::Aggregation> levels = {vfp::Aggregation::daily,
                                            vfp::Aggregation::monthly,
                                            vfp::Aggregation::annual};
    if (cfg.contains("sensitivity") &&
        cfg.at("sensitivity").contains("aggregation_levels")) {
      levels.clear();
      for (const auto& s : cfg.at("sensitivity").at("aggregation_levels"))
        levels.push_back(vfp::parse_aggregation(s.get<std::string>()));
    }
    vfp::AggregationResult r = vfp::aggregation_sweep(data, spec, levels, threads);
    r.emit(dir / "sensitivity_aggregation.csv");
    vfp::write_provenance(dir, cfg, paths.all());
    std::cout << "aggregation runs: " << r.runs.size()
              << ", hourly max |vf-1|: "
              << vfp::format_double(r.hourly.max_vf_deviation) << '\n';
    return kExitOk;
  }
  if (mode == "weights") {
    vfp::WeightsVariantResult r = vfp::weights_variant(data, spec, threads);
    r.emit(dir / "sensitivity_weights.csv");
    vfp::write_provenance(dir, cfg, paths.all());
    std::cout << "weights variant done\n";
    return kExitOk;
  }
  throw vfp::ConfigError("unknown sensitivity mode: " + mode);
}

int cmd_synth(const json& cfg, const std::string& mode) {
  fs::path dir = out_dir(cfg);
  if (mode == "panel") {
    vfp::DgpConfig c = dgp_from_json(cfg);
    vfp::PanelTruth truth = vfp::generate_panel(c);
    truth.input.emit(dir / "panel_input.csv");
    truth.write_truth_json(dir / "truth.json");
    vfp::write_provenance(dir, cfg, {});
    std::cout << "panel rows: " << truth.input.rows.size() << '\n';
    return kExitOk;
  }
  if (mode == "hourly") {
    vfp::MeritOrderConfig c = merit_from_json(cfg);
    vfp::SynthDataset ds = vfp::generate_hourly(c);
    ds.emit(dir);
    vfp::write_provenance(dir, cfg, {});
    std::cout << "hourly rows: " << ds.store.total_rows() << '\n';
    return kExitOk;
  }
  throw vfp::ConfigError("unknown synth mode: " + mode);
}

int cmd_report(const json& cfg, unsigned threads) {
  DataPaths paths = data_paths(cfg);
  vfp::Dataset data = load_dataset(paths, threads);
  vfp::ModelSpec spec = model_spec(cfg);
  fs::path dir = out_dir(cfg);

  {
    std::ofstream out(dir / "load_report.json", std::ios::binary);
    out << data.store.report().to_json().dump(2) << '\n';
  }
  vfp::PipelineResult pr = vfp::run_pipeline(data, spec, threads);
  pr.metrics.emit(dir / "metrics.csv");
  pr.metrics.ic.emit(dir / "ic_edges.csv");
  pr.weights.emit(dir / "weights.csv");
  pr.input.emit(dir / "panel_input.csv");

  vfp::DesignMatrix design = vfp::assemble_design(spec, pr.input);
  vfp::ModelResult result = vfp::fit(spec, design);
  std::string stem = std::string("model_") +
                     std::string(vfp::tech_name(spec.technology)) + "_" +
                     std::string(vfp::estimator_name(spec.estimator));
  result.write_json(dir / (stem + ".json"));
  {
    std::ofstream out(dir / (stem + ".txt"), std::ios::binary);
    out << result.to_table();
  }
  design.emit(dir / "design.csv");

  auto curves = vfp::moderator_curves(result, design, 41);
  vfp::emit_curves(curves, dir / "curves.csv");
  if (result.centering.count("b_ic")) {
    vfp::ZoneEffectsResult ze =
        vfp::zone_effects(result, pr.metrics.ic.zone_normalized);
    ze.emit(dir / "zone_effects.csv");
  }

  vfp::LooResult loo = vfp::leave_one_out(spec, pr.input, threads);
  loo.emit(dir / "sensitivity_loo.csv");
  vfp::EstimatorComparison ec = vfp::estimator_comparison(spec, pr.input);
  ec.emit(dir / "sensitivity_estimators.csv");
  vfp::WeightsVariantResult wv = vfp::weights_variant(data, spec, threads);
  wv.emit(dir / "sensitivity_weights.csv");
  std::vector<vfp::Aggregation> levels = {vfp::Aggregation::daily,
                                          vfp::Aggregation::monthly};
  if (cfg.contains("sensitivity") &&
      cfg.at("sensitivity").contains("aggregation_levels")) {
    levels.clear();
    for (const auto& s : cfg.at("sensitivity").at("aggregation_levels"))
      levels.push_back(vfp::parse_aggregation(s.get<std::string>()));
  }
  vfp::AggregationResult ar = vfp::aggregation_sweep(data, spec, levels, threads);
  ar.emit(dir / "sensitivity_aggregation.csv");

  vfp::write_provenance(dir, cfg, paths.all());
  std::cout << "report written to " << dir.string() << '\n';
  return kExitOk;
}

void emit_error(const char* type, const std::exception& e) {
  json j;
  j["error"] = {{"type", type}, {"message", e.what()}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"value-factor panel toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;

  app.add_option("-c,--config", opt.config_path, "JSON config file");
  app.add_option("-o,--output", opt.output_dir, "output directory");
  app.add_option("--threads", opt.threads, "worker threads (default 1)");
  app.add_option("--technology", opt.technology, "wind|solar");
  app.add_option("--estimator", opt.estimator, "rewb|fe");
  app.add_option("--aggregation", opt.aggregation,
                 "hourly|daily|monthly|annual");
  app.add_option("--weights", opt.weights, "ic_weighted|binary_uniform");
  app.add_option("--controls", opt.controls, "full|penetration_only");
  app.add_option("--hac-lags", opt.hac_lags, "Bartlett truncation lag");
  app.add_option("--seed", opt.seed, "synthetic generator seed");

  auto* ingest = app.add_subcommand("ingest", "validate and index input data");
  auto* metrics = app.add_subcommand("metrics", "emit per-zone-period metrics");
  auto* fit = app.add_subcommand("fit", "estimate the configured model");
  auto* effects = app.add_subcommand("effects", "emit conditional-effect curves");
  auto* sensitivity =
      app.add_subcommand("sensitivity", "robustness sweeps");
  sensitivity->add_option("mode", opt.sens_mode,
                          "loo|aggregation|weights|estimators")
      ->required();
  auto* synth = app.add_subcommand("synth", "synthetic data generators");
  synth->add_option("mode", opt.synth_mode, "panel|hourly")->required();
  auto* report =
      app.add_subcommand("report", "run the full pipeline into one directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    json cfg = resolve_config(opt, load_config(opt));
    if (app.got_subcommand(ingest)) return cmd_ingest(cfg, opt.threads);
    if (app.got_subcommand(metrics)) return cmd_metrics(cfg, opt.threads);
    if (app.got_subcommand(fit)) return cmd_fit(cfg, opt.threads);
    if (app.got_subcommand(effects)) return cmd_effects(cfg, opt.threads);
    if (app.got_subcommand(sensitivity))
      return cmd_sensitivity(cfg, opt.sens_mode, opt.threads);
    if (app.got_subcommand(synth)) return cmd_synth(cfg, opt.synth_mode);
    if (app.got_subcommand(report)) return cmd_report(cfg, opt.threads);
    throw vfp::ConfigError("no subcommand");
  } catch (const vfp::ConfigError& e) {
    emit_error("config", e);
    return kExitConfig;
  } catch (const vfp::DataError& e) {
    emit_error("data", e);
    return kExitData;
  } catch (const vfp::NumericError& e) {
    emit_error("numeric", e);
    return kExitNumeric;
  } catch (const json::exception& e) {
    emit_error("config", e);
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error("internal", e);
    return kExitNumeric;
  }
}
