#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "stablab/bounds.hpp"
#include "stablab/experiments.hpp"

using nlohmann::json;
using namespace stablab;

namespace {

json load_params(const std::string& arg) {
  std::ifstream f(arg);
  if (f) return json::parse(f);
  return json::parse(arg);  // fall back to inline JSON text
}

std::vector<std::array<std::string, 3>> read_summary_rows(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open summary: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("factor,mean,std", 0) != 0)
    throw FormatError("summary CSV: missing columns factor,mean,std");
  std::vector<std::array<std::string, 3>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::array<std::string, 3> row;
    for (auto& cell : row)
      if (!std::getline(ss, cell, ',')) throw FormatError("summary CSV: short row");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f << text;
}

int run(int argc, char** argv) {
  CLI::App app{"stability-of-fine-tuning experiment toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("stablab ") + kToolVersion +
                                        " (format " + kFormatVersion + ")");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a separable dataset CSV");
  DatasetSpec gspec;
  gspec.n = 200;
  gspec.cluster_radius = 0.5;
  gspec.bound_B = 2.0;
  std::string gen_out = "dataset.csv";
  gen->add_option("--n", gspec.n);
  gen->add_option("--d", gspec.d);
  gen->add_option("--c", gspec.center_distance_half);
  gen->add_option("--r", gspec.cluster_radius);
  gen->add_option("--B", gspec.bound_B);
  gen->add_option("--seed", gspec.seed);
  gen->add_option("--out", gen_out);

  // svm
  auto* svm = app.add_subcommand("svm", "hard-margin solve, JSON certificate out");
  std::string svm_data, svm_out = "svm.json";
  svm->add_option("--data", svm_data)->required();
  svm->add_option("--out", svm_out);

  // train
  auto* train = app.add_subcommand("train", "full-batch GD, trajectory CSV out");
  std::string tr_data, tr_out = "trajectory.csv", tr_loss = "logistic";
  TrainConfig tr_cfg;
  tr_cfg.eta = 0.0;  // 0: use half the admissible bound
  train->add_option("--data", tr_data)->required();
  train->add_option("--loss", tr_loss);
  train->add_option("--eta", tr_cfg.eta);
  train->add_option("--steps", tr_cfg.steps);
  train->add_option("--seed", tr_cfg.seed);
  train->add_option("--record-every", tr_cfg.record_every);
  train->add_option("--init-scale", tr_cfg.init_scale);
  train->add_option("--out", tr_out);

  // stability
  auto* stab = app.add_subcommand("stability", "leave-one-out sweep, CSV out");
  std::string st_data, st_out = "stability.csv";
  ExperimentConfig st_cfg;
  st_cfg.name = "sample-count";  // placeholder; only trainer fields are used
  st_cfg.steps = 1000;
  st_cfg.init_scale = 0.01;
  std::uint64_t st_seed = 0;
  stab->add_option("--data", st_data)->required();
  stab->add_option("--trainer", st_cfg.trainer)
      ->check(CLI::IsMember({"gd", "mh", "svm"}));
  stab->add_option("--loss", st_cfg.loss);
  stab->add_option("--eta-frac", st_cfg.eta_frac);
  stab->add_option("--steps", st_cfg.steps);
  stab->add_option("--heads", st_cfg.heads);
  stab->add_option("--init-scale", st_cfg.init_scale);
  stab->add_option("--seed", st_seed);
  stab->add_option("--out", st_out);

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
  std::string bound_kind, bound_params;
  bound->add_option("kind", bound_kind)
      ->required()
      ->check(CLI::IsMember({"thm1", "thm2", "cor1", "mh"}));
  bound->add_option("--params", bound_params)->required();

  // thm1
  auto* thm1 = app.add_subcommand("thm1", "verify the quadratic-surrogate bound");
  std::size_t q_d = 10, q_n = 100, q_seeds = 10;
  double q_mu = 0.5, q_beta = 1.0, q_dist = 1.0;
  long q_steps = 1000;
  std::uint64_t q_base = 1;
  std::string thm1_out = "thm1.csv";
  thm1->add_option("--d", q_d);
  thm1->add_option("--n", q_n);
  thm1->add_option("--mu", q_mu);
  thm1->add_option("--beta", q_beta);
  thm1->add_option("--dist", q_dist);
  thm1->add_option("--steps", q_steps);
  thm1->add_option("--seeds", q_seeds);
  thm1->add_option("--seed", q_base);
  thm1->add_option("--out", thm1_out);

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a named sweep");
  std::string exp_name, exp_config;
  ExperimentConfig exp_cfg;
  exp->add_option("--name", exp_name);
  exp->add_option("--config", exp_config);
  auto* o_reps = exp->add_option("--repeats", exp_cfg.repeats);
  auto* o_seed = exp->add_option("--base-seed", exp_cfg.base_seed);
  auto* o_grid = exp->add_option("--grid", exp_cfg.grid);
  auto* o_out = exp->add_option("--out", exp_cfg.out_dir);
  auto* o_jobs = exp->add_option("--jobs", exp_cfg.jobs);
  auto* o_trainer = exp->add_option("--trainer", exp_cfg.trainer);

  // plot
  auto* plot = app.add_subcommand("plot", "render a summary CSV as an SVG chart");
  std::string pl_summary, pl_out = "plot.svg";
  PlotSpec pl_spec;
  plot->add_option("--summary", pl_summary)->required();
  plot->add_option("--out", pl_out);
  plot->add_option("--title", pl_spec.title);
  plot->add_option("--xlabel", pl_spec.x_label);
  plot->add_option("--ylabel", pl_spec.y_label);
  plot->add_flag("--logx", pl_spec.log_x);
  plot->add_flag("--logy", pl_spec.log_y);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // normalize CLI11's exit-code family: 0 for --help/--version, 1 otherwise
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*gen) {
    auto ds = generate_dataset(gspec);
    write_csv(ds, gen_out);
  } else if (*svm) {
    auto ds = read_csv_file(svm_data);
    auto sol = solve_hard_margin(ds);
    json out{{"v_hat", sol.v_hat},
             {"b_hat", sol.b_hat},
             {"gamma", sol.gamma},
             {"support", sol.support_indices},
             {"kkt_residual", sol.kkt_residual}};
    write_text(svm_out, out.dump(2) + "\n");
  } else if (*train) {
    auto ds = read_csv_file(tr_data);
    tr_cfg.kind = loss_kind_from_name(tr_loss);
    if (tr_cfg.eta == 0.0) {
      tr_cfg.eta = 0.5 * max_admissible_lr(ds, Encoder::identity(), tr_cfg.kind);
      tr_cfg.strict_lr = false;
    }
    auto traj = train_gd(ds, Encoder::identity(), tr_cfg);
    std::ostringstream os;
    os << "step,loss,w_norm,dir_gap\n";
    for (const auto& s : traj.steps)
      os << s.t << ',' << format_g17(s.loss) << ',' << format_g17(s.w_norm) << ','
         << format_g17(s.dir_gap) << '\n';
    write_text(tr_out, os.str());
  } else if (*stab) {
    auto ds = read_csv_file(st_data);
    ds.seed = st_seed;
    StabilityReport rep =
        st_cfg.trainer == "svm"
            ? svm_loo_stability(ds)
            : normalized_loo_stability(
                  ds, exp_detail::make_trainer(st_cfg, ds, st_seed), st_cfg.trainer);
    std::ostringstream os;
    os << "i,gap,skipped,reason\n";
    for (const auto& e : rep.per_index)
      os << e.index << ',' << format_g17(e.gap) << ',' << (e.skipped ? 1 : 0) << ','
         << e.reason << '\n';
    write_text(st_out, os.str());
  } else if (*bound) {
    json p = load_params(bound_params);
    auto g = [&](const char* k) { return p.at(k).get<double>(); };
    double value = 0.0;
    if (bound_kind == "thm1")
      value = thm1_rhs(g("L"), g("w_dist"), g("beta"), g("mu"), g("n"));
    else if (bound_kind == "thm2")
      value = thm2_rhs(g("C"), g("t"), g("nu"), g("lam"), g("n"), g("B"), g("gamma"));
    else if (bound_kind == "cor1")
      value = cor1_rhs(g("C"), g("t"), g("nu"), g("L"), g("lam"), g("n"));
    else
      value = mh_rhs(g("C"), g("xi"), g("t"), g("H"), g("delta"), g("nu"), g("lam"),
                     g("n"), g("B"), g("gamma"));
    json out{{"bound", bound_kind}, {"value", value}, {"params", p}};
    std::cout << out.dump(2) << "\n";
  } else if (*thm1) {
    std::ostringstream os;
    os << "seed,measured_mean,measured_max,lhat,rhs,holds\n";
    for (std::size_t k = 0; k < q_seeds; ++k) {
      std::uint64_t seed = derive_seed(q_base, k);
      auto task = make_quadratic_task(q_d, q_n, q_mu, q_beta, q_dist, seed);
      auto ver = verify_thm1(task, q_steps);
      os << seed << ',' << format_g17(ver.measured_mean) << ','
         << format_g17(ver.measured_max) << ',' << format_g17(ver.lhat) << ','
         << format_g17(ver.rhs) << ',' << (ver.holds ? 1 : 0) << '\n';
    }
    write_text(thm1_out, os.str());
  } else if (*exp) {
    ExperimentConfig cfg;
    if (!exp_config.empty()) {
      std::ifstream f(exp_config);
      if (!f) throw FormatError("cannot open config: " + exp_config);
      from_json_config(json::parse(f), cfg);
    }
    if (!exp_name.empty()) cfg.name = exp_name;
    if (cfg.name.empty())
      throw ParameterError("experiment: --name or a config with \"name\" is required");
    if (*o_reps) cfg.repeats = exp_cfg.repeats;
    if (*o_seed) cfg.base_seed = exp_cfg.base_seed;
    if (*o_grid) cfg.grid = exp_cfg.grid;
    if (*o_out) cfg.out_dir = exp_cfg.out_dir;
    if (*o_jobs) cfg.jobs = exp_cfg.jobs;
    if (*o_trainer) cfg.trainer = exp_cfg.trainer;
    run_experiment(cfg);
  } else if (*plot) {
    auto rows = read_summary_rows(pl_summary);
    std::vector<PlotSeriesPoint> pts;
    for (const auto& r : rows)
      pts.push_back({std::stod(r[0]), std::stod(r[1]), std::stod(r[2])});
    write_text(pl_out, render_svg_chart(pts, pl_spec));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error&) {
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
