#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <tuple>

#include "footif/format.hpp"
#include "footif/signal_pipeline.hpp"
#include "footif/statics.hpp"
#include "footif/synthetic_subject.hpp"

namespace footif::cli {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

int report(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return exit_code_for(e);
}

std::optional<int> numbered_dir(const std::filesystem::path& p, const std::string& prefix) {
  const std::string name = p.filename().string();
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return std::nullopt;
  const std::string digits = name.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  return std::stoi(digits);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::filesystem::path> find_trial_files(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && parse_trial_filename(entry.path().filename().string())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_svg(const std::filesystem::path& path, const EnergyLandscape& land) {
  // Energy along yaw at x = y = 0 and its minimum over (x, y).
  const std::size_t np = land.phis_rad.size();
  std::vector<double> centre(np), lowest(np, std::numeric_limits<double>::infinity());
  const std::size_t cx = land.xs_cm.size() / 2, cy = land.ys_cm.size() / 2;
  for (std::size_t ip = 0; ip < np; ++ip) {
    centre[ip] = land.energy_ncm[land.index(cx, cy, ip)];
    for (std::size_t ix = 0; ix < land.xs_cm.size(); ++ix) {
      for (std::size_t iy = 0; iy < land.ys_cm.size(); ++iy) {
        lowest[ip] = std::min(lowest[ip], land.energy_ncm[land.index(ix, iy, ip)]);
      }
    }
  }
  const double top = std::max(*std::max_element(centre.begin(), centre.end()), 1e-12);
  const double w = 640, h = 400, m = 50;
  auto px = [&](std::size_t ip) { return m + (w - 2 * m) * static_cast<double>(ip) / static_cast<double>(np - 1); };
  auto py = [&](double e) { return h - m - (h - 2 * m) * e / top; };
  auto polyline = [&](const std::vector<double>& ys, const char* colour) {
    std::string pts;
    for (std::size_t ip = 0; ip < np; ++ip) {
      pts += format_double(px(ip)) + "," + format_double(py(ys[ip])) + " ";
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  };
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  out << polyline(centre, "black") << polyline(lowest, "blue");
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">yaw (deg), "
      << format_double(rad_to_deg(land.phis_rad.front())) << " to " << format_double(rad_to_deg(land.phis_rad.back()))
      << "</text>\n";
  out << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
      << ")\" text-anchor=\"middle\">energy (N cm), max " << format_double(top) << "</text>\n";
  out << "<text x=\"" << w - m << "\" y=\"" << m << "\" text-anchor=\"end\" fill=\"black\">x = y = 0</text>\n";
  out << "<text x=\"" << w - m << "\" y=\"" << m + 18 << "\" text-anchor=\"end\" fill=\"blue\">min over x, y</text>\n";
  out << "</svg>\n";
}

struct Pool {
  std::size_t correct = 0;
  std::size_t counted = 0;
  std::optional<double> fpe_sum;
  std::size_t fpe_n = 0;
};

}  // namespace

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::IoError) return kIo;
  if (is_numerical(e.code())) return kNumerical;
  return kUsage;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& path) {
  if (path) return load_config(*path);
  if (const char* env = std::getenv("FOOTIF_CONFIG"); env != nullptr && *env != '\0') return load_config(env);
  return RunConfig{};
}

std::string_view to_string(Mapping m) { return m == Mapping::Kinematic ? "kinematic" : "ica"; }

int cmd_simulate(const RunConfig& cfg, const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  if (args.subjects < 1) {
    err << "error: --subjects must be at least 1\n";
    return kUsage;
  }
  try {
    const DeviceGeometry geom(cfg.geometry);
    CohortSpec spec = cfg.cohort;
    spec.n_subjects = args.subjects;
    if (args.seed) spec.seed = *args.seed;
    const Cohort cohort = make_cohort(spec);
    const std::size_t n = write_cohort(cohort, geom, args.out);
    out << "wrote " << n << " trial files for " << cohort.subjects.size() << " subjects to " << args.out.string()
        << '\n';
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

std::vector<DatasetDir> find_datasets(const std::filesystem::path& in, const std::vector<int>& datasets) {
  std::error_code ec;
  if (!std::filesystem::is_directory(in, ec)) throw Error(ErrorCode::IoError, "not a directory: " + in.string());
  std::vector<DatasetDir> found;
  std::vector<std::pair<int, std::filesystem::path>> subjects;
  for (const auto& entry : std::filesystem::directory_iterator(in)) {
    if (!entry.is_directory()) continue;
    if (auto id = numbered_dir(entry.path(), "subject")) subjects.emplace_back(*id, entry.path());
  }
  std::sort(subjects.begin(), subjects.end());
  if (subjects.empty()) {
    found.push_back({0, 0, in});
    return found;
  }
  for (const auto& [id, path] : subjects) {
    for (int ds : datasets) {
      const auto dir = path / ("set" + std::to_string(ds));
      if (std::filesystem::is_directory(dir, ec)) found.push_back({id, ds, dir});
    }
  }
  return found;
}

SubjectModel calibrate_subject(const std::filesystem::path& dir, int subject, const RunConfig& cfg) {
  const DeviceGeometry geom(cfg.geometry);
  auto trials = load_trials(dir);
  std::erase_if(trials, [&](const TrialRecord& t) { return t.id.subject != subject || is_diagonal(t.id.direction); });
  if (trials.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "no single-direction trials for subject " + std::to_string(subject) + " in " + dir.string());
  }
  for (const auto& t : trials) validate_trial(t);
  const CalibrationSet calib = build_calibration_set(trials, geom, cfg.mapping.window);
  MappingOptions opts = cfg.mapping;
  return fit_ica(calib, opts, subject);
}

int cmd_calibrate(const RunConfig& cfg, const CalibrateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::filesystem::path dir = args.in;
    const auto nested = dataset_dir(args.in, args.subject, 1);
    std::error_code ec;
    if (std::filesystem::is_directory(nested, ec)) dir = nested;
    const SubjectModel model = calibrate_subject(dir, args.subject, cfg);
    auto file = open_out(args.out);
    write_model(file, model);
    if (!file) throw Error(ErrorCode::IoError, "write failed for " + args.out.string());
    static constexpr const char* kNames[4] = {"x", "y", "yaw", "pitch"};
    out << "subject " << args.subject << ": model written to " << args.out.string() << '\n';
    for (std::size_t d = 0; d < 4; ++d) {
      const auto& dg = model.diagnostics[d];
      out << "  " << kNames[d] << ": iterations " << dg.iterations << ", correlations";
      for (double c : dg.correlations) out << ' ' << format_double(c);
      if (dg.ambiguous) out << " (ambiguous selection, first taken)";
      out << '\n';
    }
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

TrialScore score_trial(const TrialRecord& trial, int dataset, Mapping mapping, const SubjectModel* model,
                       const DeviceGeometry& geom, const RunConfig& cfg) {
  TrialScore score;
  score.id = trial.id;
  score.dataset = dataset;
  score.mapping = mapping;
  const auto frames = filter_frames(trial.frames, cfg.pipeline.window);
  std::vector<CommandVector> commands;
  commands.reserve(frames.size());
  if (mapping == Mapping::Kinematic) {
    const OutputScaling scaling = kinematic_scaling(geom, cfg.mapping.band_fractions);
    for (const auto& f : frames) commands.push_back(kinematic_command(f, geom, scaling));
  } else {
    if (model == nullptr) throw Error(ErrorCode::InvalidArgument, "ICA scoring needs a subject model");
    for (const auto& f : frames) commands.push_back(predict_command(*model, f, geom));
  }
  const auto& fractions = mapping == Mapping::Kinematic ? cfg.mapping.band_fractions : model->options.band_fractions;
  score.accuracy = direction_accuracy(commands, trial.id.direction, fractions);
  try {
    score.foot_path_error_cm = trial_metrics(trial, geom, cfg.pipeline, cfg.sparc).foot_path_error_cm;
  } catch (const Error&) {
    score.foot_path_error_cm.reset();
  }
  return score;
}

GroupSummary cohort_accuracy(const std::vector<TrialScore>& scores, Mapping mapping, bool diagonal) {
  std::map<std::pair<int, int>, Pool> pooled;
  for (const auto& s : scores) {
    if (s.mapping != mapping || is_diagonal(s.id.direction) != diagonal) continue;
    auto& p = pooled[{s.id.subject, static_cast<int>(s.id.direction)}];
    p.correct += s.accuracy.correct;
    p.counted += s.accuracy.counted;
  }
  std::map<int, std::pair<double, int>> per_subject;
  for (const auto& [key, p] : pooled) {
    const double r = p.counted == 0 ? 0.0 : static_cast<double>(p.correct) / static_cast<double>(p.counted);
    auto& acc = per_subject[key.first];
    acc.first += r;
    acc.second += 1;
  }
  GroupSummary g;
  std::vector<double> means;
  for (const auto& [id, acc] : per_subject) means.push_back(acc.first / acc.second);
  g.n = means.size();
  if (means.empty()) return g;
  for (double m : means) g.mean += m;
  g.mean /= static_cast<double>(means.size());
  if (means.size() > 1) {
    double ss = 0.0;
    for (double m : means) ss += (m - g.mean) * (m - g.mean);
    g.stddev = std::sqrt(ss / static_cast<double>(means.size() - 1));
  }
  return g;
}

int cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const DeviceGeometry geom(cfg.geometry);
    const bool want_ica = args.baseline != Baseline::Kinematic;
    const bool want_kin = args.baseline != Baseline::Ica;
    std::vector<int> sets = args.dataset ? std::vector<int>{*args.dataset} : std::vector<int>{2, 3};
    const auto dirs = find_datasets(args.in, sets);
    if (dirs.empty()) throw Error(ErrorCode::IoError, "no datasets found under " + args.in.string());

    std::optional<SubjectModel> single_model;
    std::map<int, SubjectModel> models;
    std::error_code ec;
    const bool model_dir = std::filesystem::is_directory(args.model, ec);
    if (want_ica && !model_dir) single_model = read_model(args.model);
    auto model_for = [&](int subject) -> const SubjectModel* {
      if (!want_ica) return nullptr;
      if (single_model) {
        if (single_model->subject_id != subject) {
          throw Error(ErrorCode::InvalidArgument, "model is for subject " + std::to_string(single_model->subject_id) +
                                                      " but trials belong to subject " + std::to_string(subject));
        }
        return &*single_model;
      }
      auto it = models.find(subject);
      if (it == models.end()) {
        it = models.emplace(subject, read_model(args.model / ("subject" + std::to_string(subject) + ".model"))).first;
        if (it->second.subject_id != subject) {
          throw Error(ErrorCode::InvalidArgument, "model file subject id does not match subject " + std::to_string(subject));
        }
      }
      return &it->second;
    };

    std::vector<TrialScore> scores;
    for (const auto& ds : dirs) {
      for (const auto& trial : load_trials(ds.path)) {
        if (ds.subject != 0 && trial.id.subject != ds.subject) continue;
        validate_trial(trial);
        if (want_kin) scores.push_back(score_trial(trial, ds.dataset, Mapping::Kinematic, nullptr, geom, cfg));
        if (want_ica) {
          scores.push_back(score_trial(trial, ds.dataset, Mapping::Ica, model_for(trial.id.subject), geom, cfg));
        }
      }
    }

    auto rep = open_out(args.report);
    rep << "scope,subject,dataset,direction,trial,mapping,accuracy,correct,counted,foot_path_error_cm,accuracy_std\n";
    for (const auto& s : scores) {
      rep << "trial," << s.id.subject << ',' << s.dataset << ',' << footif::to_string(s.id.direction) << ','
          << s.id.trial << ',' << to_string(s.mapping) << ',' << format_double(s.accuracy.ratio()) << ','
          << s.accuracy.correct << ',' << s.accuracy.counted << ',' << fmt_opt(s.foot_path_error_cm) << ",\n";
    }
    std::map<std::tuple<int, int, int, int>, Pool> pooled;
    for (const auto& s : scores) {
      auto& p = pooled[{s.id.subject, s.dataset, static_cast<int>(s.id.direction), static_cast<int>(s.mapping)}];
      p.correct += s.accuracy.correct;
      p.counted += s.accuracy.counted;
      if (s.foot_path_error_cm) {
        p.fpe_sum = p.fpe_sum.value_or(0.0) + *s.foot_path_error_cm;
        ++p.fpe_n;
      }
    }
    for (const auto& [key, p] : pooled) {
      const auto [subject, dataset, dir, mapping] = key;
      const double r = p.counted == 0 ? 0.0 : static_cast<double>(p.correct) / static_cast<double>(p.counted);
      std::optional<double> fpe;
      if (p.fpe_n > 0) fpe = *p.fpe_sum / static_cast<double>(p.fpe_n);
      rep << "direction," << subject << ',' << dataset << ',' << footif::to_string(static_cast<Direction>(dir)) << ",,"
          << to_string(static_cast<Mapping>(mapping)) << ',' << format_double(r) << ',' << p.correct << ','
          << p.counted << ',' << fmt_opt(fpe) << ",\n";
    }
    for (bool diagonal : {false, true}) {
      for (Mapping m : {Mapping::Kinematic, Mapping::Ica}) {
        const GroupSummary g = cohort_accuracy(scores, m, diagonal);
        if (g.n == 0) continue;
        const char* kind = diagonal ? "diagonal" : "single";
        rep << "cohort,all,," << kind << ",," << to_string(m) << ',' << format_double(g.mean) << ",,,,"
            << format_double(g.stddev) << '\n';
        out << kind << ' ' << to_string(m) << ": accuracy " << format_double(g.mean) << " +- "
            << format_double(g.stddev) << " over " << g.n << " subjects\n";
      }
    }
    if (!rep) throw Error(ErrorCode::IoError, "write failed for " + args.report.string());
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

int cmd_energy_scan(const RunConfig& cfg, const EnergyScanArgs& args, std::ostream& out, std::ostream& err) {
  try {
    GeometryParams params = cfg.geometry;
    if (args.placement) params.placement = *args.placement;
    const DeviceGeometry geom(params);
    const EnergyLandscape land = energy_scan(geom, args.grid);

    auto csv = open_out(args.out);
    csv << "x_cm,y_cm,phi_deg,energy_ncm\n";
    for (std::size_t ix = 0; ix < land.xs_cm.size(); ++ix) {
      for (std::size_t iy = 0; iy < land.ys_cm.size(); ++iy) {
        for (std::size_t ip = 0; ip < land.phis_rad.size(); ++ip) {
          csv << format_double(land.xs_cm[ix]) << ',' << format_double(land.ys_cm[iy]) << ','
              << format_double(rad_to_deg(land.phis_rad[ip])) << ','
              << format_double(land.energy_ncm[land.index(ix, iy, ip)]) << '\n';
        }
      }
    }
    if (!csv) throw Error(ErrorCode::IoError, "write failed for " + args.out.string());

    auto emit = [&](std::ostream& os) {
      os << "kind,x_cm,y_cm,phi_deg,energy_ncm\n";
      for (const auto& p : land.minima) {
        os << "minimum," << format_double(p.x_cm) << ',' << format_double(p.y_cm) << ','
           << format_double(rad_to_deg(p.yaw_rad)) << ',' << format_double(p.energy_ncm) << '\n';
      }
      for (const auto& p : land.plateau_candidates) {
        os << "plateau," << format_double(p.x_cm) << ',' << format_double(p.y_cm) << ','
           << format_double(rad_to_deg(p.yaw_rad)) << ',' << format_double(p.energy_ncm) << '\n';
      }
    };
    out << "placement " << (params.placement == SpringPlacement::OutsideBase ? "outside" : "inside") << ": "
        << land.minima.size() << " local minima, " << land.plateau_candidates.size() << " plateau candidates\n";
    emit(out);
    if (args.minima) {
      auto mf = open_out(*args.minima);
      emit(mf);
    }
    if (args.svg) write_svg(*args.svg, land);
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

int cmd_metrics(const RunConfig& cfg, const MetricsArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const DeviceGeometry geom(cfg.geometry);
    std::error_code ec;
    if (!std::filesystem::is_directory(args.in, ec)) throw Error(ErrorCode::IoError, "not a directory: " + args.in.string());
    std::vector<TrialMetrics> rows;
    std::size_t skipped = 0;
    for (const auto& path : find_trial_files(args.in)) {
      TrialRecord trial{*parse_trial_filename(path.filename().string()), read_trial_csv(path)};
      validate_trial(trial);
      try {
        rows.push_back(trial_metrics(trial, geom, cfg.pipeline, cfg.sparc));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllStatic && e.code() != ErrorCode::TooShort) throw;
        err << "warning: skipped " << path.string() << ": " << e.what() << '\n';
        ++skipped;
      }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TrialMetrics& a, const TrialMetrics& b) {
      return std::tuple(a.id.subject, static_cast<int>(a.id.direction), a.id.trial) <
             std::tuple(b.id.subject, static_cast<int>(b.id.direction), b.id.trial);
    });
    auto csv = open_out(args.out);
    write_metrics_csv(csv, rows);
    if (!csv) throw Error(ErrorCode::IoError, "write failed for " + args.out.string());
    out << "metrics for " << rows.size() << " trials written to " << args.out.string();
    if (skipped > 0) out << " (" << skipped << " skipped)";
    out << '\n';
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

}  // namespace footif::cli
