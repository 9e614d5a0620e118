#include "vfp/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

std::vector<std::string> coefficients_of_interest(const ModelResult& result) {
  std::vector<std::string> out;
  for (const char* name :
       {"w_dom_pen", "w_nbr_pen", "cx_dom_pen.ic", "cx_nbr_pen.ic"})
    if (result.col(name) >= 0) out.push_back(name);
  return out;
}

void LooResult::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("run_id,omitted_zone,status,n_obs,coefficient,estimate,se");
  std::int64_t run_id = 0;
  for (const auto& name : coef_names) {
    w.field(run_id);
    w.field("(none)");
    w.field("ok");
    w.field(full.n_obs);
    w.field(name);
    w.field(full.coef(name));
    w.field(full.se[full.col(name)]);
    w.end_row();
  }
  for (const auto& run : runs) {
    ++run_id;
    if (!run.ok) {
      w.field(run_id);
      w.field(run.omitted_zone);
      w.field("failed: " + run.error);
      w.field(std::int64_t(0));
      w.field("");
      w.field(std::numeric_limits<double>::quiet_NaN());
      w.field(std::numeric_limits<double>::quiet_NaN());
      w.end_row();
      continue;
    }
    for (const auto& name : coef_names) {
      w.field(run_id);
      w.field(run.omitted_zone);
      w.field("ok");
      w.field(run.n_obs);
      w.field(name);
      w.field(run.coef.at(name));
      w.field(run.se.at(name));
      w.end_row();
    }
  }
}

LooResult leave_one_out(const ModelSpec& spec, const PanelInput& input,
                        unsigned threads) {
  LooResult out;
  DesignMatrix full_design = assemble_design(spec, input);
  out.full = fit(spec, full_design);
  out.coef_names = coefficients_of_interest(out.full);

  const std::vector<std::string> zones = full_design.entity_ids;
  if (zones.size() < 3)
    throw DataError("leave_one_out: need at least 3 zones in the sample");

  out.runs.resize(zones.size());
  parallel_for(zones.size(), threads, [&](std::size_t zi) {
    LooRun& run = out.runs[zi];
    run.omitted_zone = zones[zi];
    PanelInput reduced;
    reduced.tech = input.tech;
    reduced.level = input.level;
    reduced.zone_ids = input.zone_ids;
    for (const auto& r : input.rows)
      if (input.zone_ids[r.zone] != run.omitted_zone) reduced.rows.push_back(r);
    try {
      DesignMatrix d = assemble_design(spec, reduced);
      ModelResult m = fit(spec, d);
      run.n_obs = m.n_obs;
      for (const auto& name : out.coef_names) {
        int c = m.col(name);
        if (c < 0) throw NumericError("column dropped in LOO run: " + name);
        run.coef[name] = m.beta[c];
        run.se[name] = m.se[c];
      }
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
  });
  return out;
}

void AggregationResult::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("run_id,level,status,n_obs,coefficient,estimate,se");
  std::int64_t run_id = 0;
  for (const auto& run : runs) {
    if (!run.ok) {
      w.field(run_id);
      w.field(aggregation_name(run.level));
      w.field("failed: " + run.error);
      w.field(std::int64_t(0));
      w.field("");
      w.field(std::numeric_limits<double>::quiet_NaN());
      w.field(std::numeric_limits<double>::quiet_NaN());
      w.end_row();
      ++run_id;
      continue;
    }
    for (const auto& [name, est] : run.coef) {
      w.field(run_id);
      w.field(aggregation_name(run.level));
      w.field("ok");
      w.field(run.n_obs);
      w.field(name);
      w.field(est);
      w.field(run.se.at(name));
      w.end_row();
    }
    ++run_id;
  }
  w.field(run_id);
  w.field("hourly_null_check");
  w.field("ok");
  w.field(hourly.n_obs);
  w.field("max_vf_deviation");
  w.field(hourly.max_vf_deviation);
  w.field(std::numeric_limits<double>::quiet_NaN());
  w.end_row();
  w.field(run_id);
  w.field("hourly_null_check");
  w.field("ok");
  w.field(hourly.n_obs);
  w.field("abs_penetration_slope");
  w.field(hourly.pen_coef_abs);
  w.field(std::numeric_limits<double>::quiet_NaN());
  w.end_row();
}

AggregationResult aggregation_sweep(const Dataset& data, const ModelSpec& spec,
                                    const std::vector<Aggregation>& levels,
                                    unsigned threads) {
  AggregationResult out;
  for (Aggregation level : levels) {
    AggregationRun run;
    run.level = level;
    try {
      ModelSpec s = spec;
      s.aggregation = level;
      PipelineResult pr = run_pipeline(data, s, threads);
      PanelInput input = std::move(pr.input);
      if (level == Aggregation::annual) {
        // Entities need two years of observations for a within component.
        std::map<int, int> counts;
        for (const auto& r : input.rows) counts[r.zone]++;
        std::set<int> dropped;
        for (const auto& [z, c] : counts)
          if (c < 2) dropped.insert(z);
        if (!dropped.empty()) {
          std::erase_if(input.rows, [&](const PanelInputRow& r) {
            return dropped.count(r.zone) > 0;
          });
          run.warnings.push_back(std::to_string(dropped.size()) +
                                 " entities dropped with fewer than 2 years");
        }
      }
      DesignMatrix d = assemble_design(s, input);
      ModelResult m = fit(s, d);
      run.n_obs = m.n_obs;
      for (const auto& name : coefficients_of_interest(m)) {
        run.coef[name] = m.coef(name);
        run.se[name] = m.se[m.col(name)];
      }
      for (auto& w : m.warnings) run.warnings.push_back(w);
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
    out.runs.push_back(std::move(run));
  }

  // Hourly degenerate case: single-hour windows make market value equal the
  // price, so the value factor is one and the penetration slope vanishes.
  {
    ModelSpec s = spec;
    s.aggregation = Aggregation::hourly;
    s.controls = ControlSet::penetration_only;
    PipelineResult pr = run_pipeline(data, s, threads);
    DesignMatrix d = assemble_design(s, pr.input);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < d.y.size(); ++i)
      dev = std::max(dev, std::abs(d.y[i] - 1.0));
    ModelResult m = fit(s, d);
    out.hourly.max_vf_deviation = dev;
    out.hourly.n_obs = m.n_obs;
    int c = m.col("w_dom_pen");
    out.hourly.pen_coef_abs = c >= 0 ? std::abs(m.beta[c]) : 0.0;
  }
  return out;
}

void WeightsVariantResult::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("scheme,coefficient,estimate,se");
  for (const ModelResult* m : {&weighted, &uniform}) {
    for (const auto& name : coef_names) {
      int c = m->col(name);
      w.field(weight_scheme_name(m->weights));
      w.field(name);
      w.field(c >= 0 ? m->beta[c] : std::numeric_limits<double>::quiet_NaN());
      w.field(c >= 0 ? m->se[c] : std::numeric_limits<double>::quiet_NaN());
      w.end_row();
    }
  }
}

WeightsVariantResult weights_variant(const Dataset& data,
                                     const ModelSpec& spec, unsigned threads) {
  WeightsVariantResult out;
  {
    ModelSpec s = spec;
    s.weights = WeightScheme::ic_weighted;
    PipelineResult pr = run_pipeline(data, s, threads);
    out.weighted = fit(s, assemble_design(s, pr.input));
  }
  {
    ModelSpec s = spec;
    s.weights = WeightScheme::binary_uniform;
    PipelineResult pr = run_pipeline(data, s, threads);
    out.uniform = fit(s, assemble_design(s, pr.input));
  }
  out.coef_names = coefficients_of_interest(out.weighted);
  return out;
}

void EstimatorComparison::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("coefficient,rewb,fe,rel_dev");
  for (const auto& r : rows) {
    w.field(r.name);
    w.field(r.rewb);
    w.field(r.fe);
    w.field(r.rel_dev);
    w.end_row();
  }
}

EstimatorComparison estimator_comparison(const ModelSpec& spec,
                                         const PanelInput& input) {
  EstimatorComparison out;
  DesignMatrix design = assemble_design(spec, input);
  ModelSpec sr = spec;
  sr.estimator = Estimator::rewb;
  out.rewb = fit(sr, design);
  ModelSpec sf = spec;
  sf.estimator = Estimator::fe;
  out.fe = fit(sf, design);

  for (std::size_t i = 0; i < out.fe.names.size(); ++i) {
    const std::string& name = out.fe.names[i];
    int cr = out.rewb.col(name);
    if (cr < 0) continue;
    EstimatorComparison::Row row;
    row.name = name;
    row.rewb = out.rewb.beta[cr];
    row.fe = out.fe.beta[Eigen::Index(i)];
    double scale = std::max(std::abs(row.rewb), std::abs(row.fe));
    row.rel_dev = scale > 1e-12 ? std::abs(row.rewb - row.fe) / scale : 0.0;
    out.rows.push_back(row);
    out.max_rel_dev = std::max(out.max_rel_dev, row.rel_dev);
  }
  return out;
}

}  // namespace vfp
