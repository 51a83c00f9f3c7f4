#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablab/dataset.hpp"
#include "stablab/gd.hpp"
#include "stablab/linalg.hpp"
#include "stablab/losses.hpp"
#include "stablab/parallel.hpp"
#include "stablab/quad.hpp"
#include "stablab/stability.hpp"
#include "stablab/svg.hpp"
#include "stablab/svm.hpp"

namespace stablab {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kFormatVersion = "1";

inline double median(std::vector<double> v) {
  if (v.empty()) throw ParameterError("median: empty sample");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct ExperimentConfig {
  std::string name;
  std::uint64_t base_seed = 12345;
  int repeats = 0;               // 0: use the per-experiment default
  std::vector<double> grid;      // empty: use the per-experiment default

  // dataset geometry
  std::size_t n = 200;
  std::size_t d = 0;             // 0: use the per-experiment default
  double center_c = 1.0;
  double radius_r = 0.5;
  double bound_B = 2.0;

  // trainer
  std::string trainer = "svm";   // gd | mh | svm
  std::string loss = "exponential";
  double eta_frac = 0.5;         // fraction of the admissible learning rate
  long steps = 0;                // 0: use the per-experiment default
  double init_scale = -1.0;      // < 0: use the per-experiment default
  std::size_t heads = 50;

  // quadratic surrogate
  double quad_mu = 0.5;
  double quad_beta = 1.0;
  double quad_dist = 1.0;
  std::size_t quad_d = 10;

  // method knobs
  double alpha = 10.0;
  double drop_ratio = 0.1;
  std::size_t perturb_draws = 20;

  std::string out_dir;
  unsigned jobs = 0;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "head-convergence", "sample-count", "margin-sweep", "param-distance",
      "sample-bound",     "thm1-verify",  "epoch-sweep",  "lr-sweep",
      "mmr-effect",       "perturb-stability"};
  return names;
}

inline void apply_experiment_defaults(ExperimentConfig& cfg) {
  const std::string& n = cfg.name;
  if (std::find(experiment_names().begin(), experiment_names().end(), n) ==
      experiment_names().end())
    throw ParameterError("unknown experiment name: " + n);
  auto set_grid = [&](std::vector<double> g) { if (cfg.grid.empty()) cfg.grid = std::move(g); };
  auto set_reps = [&](int r) { if (cfg.repeats == 0) cfg.repeats = r; };
  if (n == "head-convergence") { set_grid({1, 5, 10, 50, 100}); set_reps(100); }
  else if (n == "sample-count") { set_grid({100, 200, 400, 800}); set_reps(50); }
  else if (n == "margin-sweep") { set_grid({0.25, 0.5, 1, 2}); set_reps(50); }
  else if (n == "param-distance") { set_grid({0.5, 1, 2, 4}); set_reps(50); }
  else if (n == "sample-bound") { set_grid({1, 2, 4, 8}); set_reps(50); }
  else if (n == "thm1-verify") { set_grid({50, 100, 200}); set_reps(17); }
  else if (n == "epoch-sweep") { set_grid({100, 1000, 10000}); set_reps(10); }
  else if (n == "lr-sweep") { set_grid({0.05, 0.1, 0.25, 0.5}); set_reps(20); }
  else if (n == "mmr-effect") { set_grid({0, 10}); set_reps(100); }
  else if (n == "perturb-stability") { set_grid({0.1, 0.2, 0.3}); set_reps(20); }
  if (cfg.steps == 0) {
    // param-distance needs a short horizon: every per-sample quadratic
    // vanishes at the shared optimum, so leave-one-out gaps decay to zero as
    // t grows and only the transient separates the initialization distances.
    cfg.steps = n == "param-distance" ? 12 : 1000;
  }
  if (cfg.d == 0) {
    // in the planar case the head residuals saturate instead of averaging
    // out, so the head sweep runs in a higher-dimensional feature space
    cfg.d = n == "head-convergence" ? 10 : 2;
  }
  if (cfg.init_scale < 0) {
    // head averaging only bites when the init noise dominates the shared
    // finite-horizon bias, so that sweep starts from a wide initialization
    cfg.init_scale = n == "head-convergence" ? 4.0 : 0.01;
  }
  if (cfg.repeats < 1) throw ParameterError("ExperimentConfig: repeats must be >= 1");
  if (cfg.grid.empty()) throw ParameterError("ExperimentConfig: empty factor grid");
  if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end()))
    throw ParameterError("ExperimentConfig: grid must be sorted ascending");
}

inline void from_json_config(const nlohmann::json& j, ExperimentConfig& cfg) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("name", cfg.name);
  get("base_seed", cfg.base_seed);
  get("repeats", cfg.repeats);
  get("grid", cfg.grid);
  get("n", cfg.n);
  get("d", cfg.d);
  get("center_c", cfg.center_c);
  get("radius_r", cfg.radius_r);
  get("bound_B", cfg.bound_B);
  get("trainer", cfg.trainer);
  get("loss", cfg.loss);
  get("eta_frac", cfg.eta_frac);
  get("steps", cfg.steps);
  get("init_scale", cfg.init_scale);
  get("heads", cfg.heads);
  get("quad_mu", cfg.quad_mu);
  get("quad_beta", cfg.quad_beta);
  get("quad_dist", cfg.quad_dist);
  get("quad_d", cfg.quad_d);
  get("alpha", cfg.alpha);
  get("drop_ratio", cfg.drop_ratio);
  get("perturb_draws", cfg.perturb_draws);
  get("out_dir", cfg.out_dir);
  get("jobs", cfg.jobs);
}

inline nlohmann::json to_json_config(const ExperimentConfig& cfg) {
  return nlohmann::json{
      {"name", cfg.name},       {"base_seed", cfg.base_seed},
      {"repeats", cfg.repeats}, {"grid", cfg.grid},
      {"n", cfg.n},             {"d", cfg.d},
      {"center_c", cfg.center_c}, {"radius_r", cfg.radius_r},
      {"bound_B", cfg.bound_B}, {"trainer", cfg.trainer},
      {"loss", cfg.loss},       {"eta_frac", cfg.eta_frac},
      {"steps", cfg.steps},     {"init_scale", cfg.init_scale},
      {"heads", cfg.heads},     {"quad_mu", cfg.quad_mu},
      {"quad_beta", cfg.quad_beta}, {"quad_dist", cfg.quad_dist},
      {"quad_d", cfg.quad_d},   {"alpha", cfg.alpha},
      {"drop_ratio", cfg.drop_ratio}, {"perturb_draws", cfg.perturb_draws},
      {"out_dir", cfg.out_dir}, {"jobs", cfg.jobs}};
}

// base xor hash(value, repeat); datasets are seeded from the repeat alone so
// factor levels see paired data.
inline std::uint64_t child_seed(std::uint64_t base, double value, int rep) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  return derive_seed(base ^ derive_seed(bits, 0x9d5f), static_cast<std::uint64_t>(rep));
}

inline std::uint64_t dataset_seed_for_rep(std::uint64_t base, int rep) {
  return derive_seed(base, 0xda7a0000ULL + static_cast<std::uint64_t>(rep));
}

struct RunRecord {
  double factor;
  int rep;
  std::uint64_t seed;
  bool ok;
  std::string error;
  double metric;
  std::vector<std::pair<std::string, double>> extras;
};

struct SummaryRow {
  double factor;
  double mean;
  double std_dev;
  int n_runs;
  int n_skipped;
  std::vector<double> values;  // in-memory only
};

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
  std::string metric_name;
  ExperimentConfig config;
  std::vector<RunRecord> runs;
};

namespace exp_detail {

inline DatasetSpec dataset_spec(const ExperimentConfig& cfg, double factor,
                                std::uint64_t ds_seed) {
  DatasetSpec spec;
  spec.n = cfg.n;
  spec.d = cfg.d;
  spec.center_distance_half = cfg.center_c;
  spec.cluster_radius = cfg.radius_r;
  spec.bound_B = cfg.bound_B;
  spec.seed = ds_seed;
  const std::string& name = cfg.name;
  if (name == "head-convergence") {
    // tight clusters: the max-margin direction is approached fast enough that
    // the init-noise averaging effect under study is visible at t = 10^3
    spec.cluster_radius = 0.25;
    spec.bound_B = spec.center_distance_half + spec.cluster_radius;
  } else if (name == "sample-count") {
    spec.n = static_cast<std::size_t>(factor);
  } else if (name == "margin-sweep") {
    // margin-by-construction c - r = factor at fixed cluster radius
    spec.center_distance_half = factor + cfg.radius_r;
    spec.bound_B = spec.center_distance_half + spec.cluster_radius;
  } else if (name == "sample-bound") {
    // fixed construction margin, feature bound B = factor
    double m = cfg.center_c - cfg.radius_r;
    spec.center_distance_half = 0.5 * (factor + m);
    spec.cluster_radius = 0.5 * (factor - m);
    spec.bound_B = factor;
  }
  return spec;
}

inline Trainer make_gd_trainer(double eta, long steps, LossKind kind, double init_scale,
                               std::uint64_t seed) {
  TrainConfig tc;
  tc.eta = eta;
  tc.steps = steps;
  tc.kind = kind;
  tc.init_scale = init_scale;
  tc.seed = seed;
  tc.record_every = std::max<long>(1, steps);
  tc.strict_lr = false;  // eta validated once on the full dataset
  tc.track_direction = false;
  return [tc](const LabeledDataset& ds) {
    return train_gd(ds, Encoder::identity(), tc).final_w;
  };
}

inline Trainer make_mh_trainer(double eta, long steps, LossKind kind, double init_scale,
                               std::size_t heads, std::uint64_t seed) {
  TrainConfig tc;
  tc.eta = eta;
  tc.steps = steps;
  tc.kind = kind;
  tc.init_scale = init_scale;
  tc.seed = seed;
  tc.record_every = std::max<long>(1, steps);
  tc.strict_lr = false;
  tc.track_direction = false;
  return [tc, heads](const LabeledDataset& ds) {
    return train_multihead(ds, Encoder::identity(), tc, heads).averaged.final_w;
  };
}

inline Trainer make_trainer(const ExperimentConfig& cfg, const LabeledDataset& full,
                            std::uint64_t seed) {
  if (cfg.trainer == "svm")
    return [](const LabeledDataset& ds) { return solve_hard_margin(ds).augmented_w(); };
  LossKind kind = loss_kind_from_name(cfg.loss);
  double eta = cfg.eta_frac * max_admissible_lr(full, Encoder::identity(), kind);
  if (cfg.trainer == "gd")
    return make_gd_trainer(eta, cfg.steps, kind, cfg.init_scale, seed);
  if (cfg.trainer == "mh")
    return make_mh_trainer(eta, cfg.steps, kind, cfg.init_scale, cfg.heads, seed);
  throw ParameterError("unknown trainer: " + cfg.trainer);
}

inline RunRecord run_single(const ExperimentConfig& cfg, double factor, int rep) {
  RunRecord rec;
  rec.factor = factor;
  rec.rep = rep;
  rec.seed = child_seed(cfg.base_seed, factor, rep);
  rec.ok = true;
  rec.metric = 0.0;
  std::uint64_t ds_seed = dataset_seed_for_rep(cfg.base_seed, rep);
  const std::string& name = cfg.name;
  try {
    if (name == "head-convergence") {
      auto ds = generate_dataset(dataset_spec(cfg, factor, ds_seed));
      LossKind kind = loss_kind_from_name(cfg.loss);
      TrainConfig tc;
      tc.kind = kind;
      tc.eta = cfg.eta_frac * max_admissible_lr(ds, Encoder::identity(), kind);
      tc.steps = cfg.steps;
      tc.init_scale = cfg.init_scale;
      tc.seed = rec.seed;
      tc.record_every = std::max<long>(1, cfg.steps);
      tc.strict_lr = false;
      auto res = train_multihead(ds, Encoder::identity(), tc,
                                 static_cast<std::size_t>(factor));
      rec.metric = res.averaged.steps.back().dir_gap;
    } else if (name == "sample-count" || name == "margin-sweep" ||
               name == "sample-bound" || name == "lr-sweep" ||
               name == "epoch-sweep") {
      ExperimentConfig c2 = cfg;
      if (name == "lr-sweep") {
        c2.eta_frac = factor;
        if (c2.trainer == "svm") c2.trainer = "gd";  // lr only matters for GD
      } else if (name == "epoch-sweep") {
        c2.steps = static_cast<long>(factor);
        if (c2.trainer == "svm") c2.trainer = "gd";  // epochs only matter for GD
      }
      auto ds = generate_dataset(dataset_spec(c2, factor, ds_seed));
      Trainer tr = make_trainer(c2, ds, rec.seed);
      StabilityReport rep_out =
          c2.trainer == "svm" ? svm_loo_stability(ds, true, {}, 1)
                              : normalized_loo_stability(ds, tr, c2.trainer, {}, 1);
      rec.metric = rep_out.mean_gap;
      rec.extras.emplace_back("std_gap", rep_out.std_gap);
      rec.extras.emplace_back("n_skipped", static_cast<double>(rep_out.skipped));
    } else if (name == "param-distance" || name == "thm1-verify") {
      double mu = cfg.quad_mu, beta = cfg.quad_beta, dist = cfg.quad_dist;
      std::size_t qn = cfg.n, qd = cfg.quad_d;
      std::uint64_t task_seed = rec.seed;
      if (name == "param-distance") {
        dist = factor;
        task_seed = ds_seed;  // same task family at every distance level
      }
      if (name == "thm1-verify") {
        qn = static_cast<std::size_t>(factor);
        static const double ratios[] = {0.25, 0.5, 0.75};
        mu = beta * ratios[rep % 3];
      }
      auto task = make_quadratic_task(qd, qn, mu, beta, dist, task_seed);
      auto ver = verify_thm1(task, cfg.steps);
      rec.metric = name == "thm1-verify" ? (ver.holds ? 1.0 : 0.0) : ver.measured_mean;
      rec.extras.emplace_back("measured_mean", ver.measured_mean);
      rec.extras.emplace_back("measured_max", ver.measured_max);
      rec.extras.emplace_back("lhat", ver.lhat);
      rec.extras.emplace_back("rhs", ver.rhs);
      rec.extras.emplace_back("holds", ver.holds ? 1.0 : 0.0);
    } else if (name == "mmr-effect") {
      auto ds = generate_dataset(dataset_spec(cfg, factor, ds_seed));
      Encoder enc = Encoder::scaled_identity(cfg.d, 1.0);
      // init from the repeat seed so regularizer settings compare pairwise
      LinearHead w0 = gaussian_init(cfg.d + 1, 0.01, derive_seed(ds_seed, 0x771));
      TrainConfig tc;
      tc.kind = loss_kind_from_name(cfg.loss);
      tc.eta = 0.05;
      tc.steps = cfg.steps;
      tc.seed = rec.seed;
      tc.record_every = std::max<long>(1, cfg.steps);
      tc.strict_lr = false;
      auto res = train_mmr(ds, enc, w0, tc, factor, true);
      rec.metric = res.steps.back().center_dist;
      rec.extras.emplace_back("final_margin", res.steps.back().margin);
      rec.extras.emplace_back("objective", res.steps.back().loss);
    } else if (name == "perturb-stability") {
      auto ds = generate_dataset(dataset_spec(cfg, factor, ds_seed));
      Trainer tr = make_trainer(cfg, ds, rec.seed);
      auto rep_out = data_perturbation_stability(ds, factor, cfg.perturb_draws, tr,
                                                 cfg.trainer, 1);
      rec.metric = rep_out.mean_gap;
      rec.extras.emplace_back("std_gap", rep_out.std_gap);
    } else {
      throw ParameterError("unknown experiment name: " + name);
    }
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.error = ex.what();
  }
  return rec;
}

}  // namespace exp_detail

inline const char* experiment_metric_name(const std::string& name) {
  if (name == "head-convergence") return "dir_gap";
  if (name == "mmr-effect") return "center_dist";
  if (name == "thm1-verify") return "holds";
  if (name == "param-distance") return "loo_gap";
  return "mean_gap";
}

inline ExperimentSummary run_experiment(ExperimentConfig cfg,
                                        bool write_outputs = true) {
  apply_experiment_defaults(cfg);
  namespace fs = std::filesystem;

  // collision check over all child seeds
  {
    std::vector<std::uint64_t> seeds;
    for (double v : cfg.grid)
      for (int r = 0; r < cfg.repeats; ++r) seeds.push_back(child_seed(cfg.base_seed, v, r));
    std::sort(seeds.begin(), seeds.end());
    if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end())
      throw ParameterError("run_experiment: child seed collision");
  }

  std::vector<std::pair<double, int>> cells;
  for (double v : cfg.grid)
    for (int r = 0; r < cfg.repeats; ++r) cells.emplace_back(v, r);
  std::vector<RunRecord> runs(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    runs[k] = exp_detail::run_single(cfg, cells[k].first, cells[k].second);
  }, cfg.jobs);

  ExperimentSummary summary;
  summary.metric_name = experiment_metric_name(cfg.name);
  summary.config = cfg;
  for (double v : cfg.grid) {
    SummaryRow row{v, 0.0, 0.0, 0, 0, {}};
    for (const auto& rec : runs)
      if (rec.factor == v) {
        if (rec.ok) {
          row.values.push_back(rec.metric);
          ++row.n_runs;
        } else {
          ++row.n_skipped;
        }
      }
    if (row.n_runs) {
      double sum = 0.0;
      for (double x : row.values) sum += x;
      row.mean = sum / row.n_runs;
      double ss = 0.0;
      for (double x : row.values) ss += (x - row.mean) * (x - row.mean);
      row.std_dev = std::sqrt(ss / row.n_runs);
    }
    summary.rows.push_back(std::move(row));
  }
  summary.runs = std::move(runs);

  if (write_outputs) {
    fs::path out = cfg.out_dir.empty() ? fs::path(cfg.name) : fs::path(cfg.out_dir);
    if (const char* root = std::getenv("STABLAB_OUT"); root && cfg.out_dir.empty())
      out = fs::path(root) / cfg.name;
    fs::create_directories(out / "runs");

    {
      std::ofstream f(out / "summary.csv");
      if (!f) throw FormatError("cannot write " + (out / "summary.csv").string());
      f << "factor,mean,std,n_runs,n_skipped\n";
      for (const auto& row : summary.rows)
        f << format_g17(row.factor) << ',' << format_g17(row.mean) << ','
          << format_g17(row.std_dev) << ',' << row.n_runs << ',' << row.n_skipped << '\n';
    }
    for (const auto& rec : summary.runs) {
      std::ostringstream fname;
      fname << "run_" << rec.factor << '_' << rec.rep << ".csv";
      std::ofstream f(out / "runs" / fname.str());
      f << "factor,rep,seed,ok,metric";
      for (const auto& [k, _] : rec.extras) f << ',' << k;
      f << "\nerror:" << rec.error << "\n";
      f << format_g17(rec.factor) << ',' << rec.rep << ',' << rec.seed << ','
        << (rec.ok ? 1 : 0) << ',' << format_g17(rec.metric);
      for (const auto& [_, v] : rec.extras) f << ',' << format_g17(v);
      f << '\n';
    }
    {
      std::vector<PlotSeriesPoint> pts;
      for (const auto& row : summary.rows) pts.push_back({row.factor, row.mean, row.std_dev});
      PlotSpec ps;
      ps.title = cfg.name;
      ps.x_label = "factor";
      ps.y_label = summary.metric_name;
      ps.log_x = cfg.name == "sample-count" || cfg.name == "epoch-sweep";
      std::ofstream f(out / "plot.svg", std::ios::binary);
      f << render_svg_chart(pts, ps);
    }
    {
      nlohmann::json manifest;
      manifest["config"] = to_json_config(cfg);
      manifest["tool_version"] = kToolVersion;
      manifest["format_version"] = kFormatVersion;
      manifest["metric"] = summary.metric_name;
      manifest["timestamp"] = static_cast<long>(std::time(nullptr));
      std::ofstream f(out / "manifest.json");
      f << manifest.dump(2) << '\n';
    }
  }
  return summary;
}

}  // namespace stablab
