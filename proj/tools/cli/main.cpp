#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace footif;

int main(int argc, char** argv) {
  CLI::App app{"Four-DOF foot interface toolkit: simulate, calibrate, evaluate, energy scans, metrics"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "Configuration file (default: $FOOTIF_CONFIG, else built-in defaults)");

  cli::SimulateArgs sim;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort of labeled force trials");
  simulate->add_option("--subjects", sim.subjects, "Number of synthetic subjects")->default_val(10);
  simulate->add_option("--seed", sim_seed, "Cohort seed (default from [simulation] seed)");
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();

  cli::CalibrateArgs cal;
  std::string cal_in, cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a subject-specific ICA model from dataset 1");
  calibrate->add_option("--subject", cal.subject, "Subject id")->required();
  calibrate->add_option("--in", cal_in, "Cohort directory or directory of trial CSVs")->required();
  calibrate->add_option("--out", cal_out, "Model file to write")->required();

  cli::EvaluateArgs ev;
  std::string ev_model, ev_in, ev_report;
  std::optional<int> ev_dataset;
  std::string ev_baseline = "both";
  auto* evaluate = app.add_subcommand("evaluate", "Score ICA and kinematic mappings by direction accuracy");
  evaluate->add_option("--model", ev_model, "Model file, or directory of subject<id>.model files");
  evaluate->add_option("--in", ev_in, "Cohort directory or directory of trial CSVs")->required();
  evaluate->add_option("--dataset", ev_dataset, "Dataset number under a cohort directory (default: 2 and 3)")
      ->check(CLI::Range(1, 3));
  evaluate->add_option("--baseline", ev_baseline, "Mappings to score")
      ->check(CLI::IsMember({"kinematic", "ica", "both"}))
      ->default_val("both");
  evaluate->add_option("--report", ev_report, "Report CSV to write")->required();

  cli::EnergyScanArgs es;
  std::optional<std::string> es_placement, es_minima, es_svg;
  std::string es_out;
  auto* energy = app.add_subcommand("energy-scan", "Elastic energy over an (x, y, yaw) grid with local minima");
  energy->add_option("--placement", es_placement, "Spring placement (default from config)")
      ->check(CLI::IsMember({"inside", "outside"}));
  energy->add_option("--nx", es.grid.nx, "Grid points along x")->default_val(51);
  energy->add_option("--ny", es.grid.ny, "Grid points along y")->default_val(51);
  energy->add_option("--nphi", es.grid.nphi, "Grid points along yaw")->default_val(25);
  energy->add_option("-o,--out", es_out, "Landscape CSV to write")->required();
  energy->add_option("--minima", es_minima, "Also write the minima list to this CSV");
  energy->add_option("--svg", es_svg, "Also write an SVG plot of energy against yaw");

  cli::MetricsArgs me;
  std::string me_in, me_out;
  auto* metrics = app.add_subcommand("metrics", "Foot-path error and SPARC smoothness for every trial");
  metrics->add_option("--in", me_in, "Directory searched recursively for trial CSVs")->required();
  metrics->add_option("--out", me_out, "Metrics CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  RunConfig cfg;
  try {
    cfg = cli::resolve_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }

  if (simulate->parsed()) {
    sim.seed = sim_seed;
    sim.out = sim_out;
    return cli::cmd_simulate(cfg, sim, std::cout, std::cerr);
  }
  if (calibrate->parsed()) {
    cal.in = cal_in;
    cal.out = cal_out;
    return cli::cmd_calibrate(cfg, cal, std::cout, std::cerr);
  }
  if (evaluate->parsed()) {
    static const std::map<std::string, cli::Baseline> kBaselines = {
        {"kinematic", cli::Baseline::Kinematic}, {"ica", cli::Baseline::Ica}, {"both", cli::Baseline::Both}};
    ev.baseline = kBaselines.at(ev_baseline);
    if (ev.baseline != cli::Baseline::Kinematic && ev_model.empty()) {
      std::cerr << "error: --model is required unless --baseline kinematic\n";
      return cli::kUsage;
    }
    ev.model = ev_model;
    ev.in = ev_in;
    ev.dataset = ev_dataset;
    ev.report = ev_report;
    return cli::cmd_evaluate(cfg, ev, std::cout, std::cerr);
  }
  if (energy->parsed()) {
    if (es_placement) {
      es.placement = *es_placement == "inside" ? SpringPlacement::InsideBase : SpringPlacement::OutsideBase;
    }
    es.out = es_out;
    if (es_minima) es.minima = *es_minima;
    if (es_svg) es.svg = *es_svg;
    return cli::cmd_energy_scan(cfg, es, std::cout, std::cerr);
  }
  if (metrics->parsed()) {
    me.in = me_in;
    me.out = me_out;
    return cli::cmd_metrics(cfg, me, std::cout, std::cerr);
  }
  return cli::kUsage;
}
