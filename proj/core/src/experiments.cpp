#include "omitq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace omitq {

const std::vector<std::string> kExperimentNames = {
    "main_dip",           "transistor",        "crossover_sideband1",
    "crossover_sideband2", "temperature_sweep", "custom_spectrum"};

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, const std::string& key,
                    int line) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("value for '" + key + "' is not a number: '" + value +
                          "'",
                      line);
  }
  if (used != value.size()) {
    throw ConfigError("trailing characters after number for '" + key + "'",
                      line);
  }
  if (!std::isfinite(out)) {
    throw ConfigError("value for '" + key + "' must be finite", line);
  }
  return out;
}

long parse_long(const std::string& value, const std::string& key, int line) {
  const double d = parse_double(value, key, line);
  const long l = std::lround(d);
  if (static_cast<double>(l) != d) {
    throw ConfigError("value for '" + key + "' must be an integer", line);
  }
  return l;
}

std::vector<double> parse_list(const std::string& value, const std::string& key,
                               int line) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ConfigError("empty entry in list for '" + key + "'", line);
    }
    out.push_back(parse_double(item, key, line));
  }
  if (out.empty()) {
    throw ConfigError("empty list for '" + key + "'", line);
  }
  return out;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_cell(double v) {
  if (!std::isfinite(v)) {
    throw IntegrationFailureError("refusing to write non-finite value to CSV");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

std::string format_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_full(values[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(std::istream& in,
                                        const std::string& origin) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::optional<double> kappa, kappa_out, gamma_m, g0, n_th, eps_c, eps_p,
      delta_c, delta_p;
  std::optional<std::string> experiment, method;
  std::optional<std::vector<double>> ratios, n_th_values;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ": expected 'key = value'", line);
    }
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ": empty key or value", line);
    }
    if (seen.count(key)) {
      throw ConfigError(origin + ": duplicate key '" + key +
                            "' (first set on line " +
                            std::to_string(seen[key]) + ")",
                        line);
    }
    seen[key] = line;

    if (key == "experiment") {
      experiment = value;
    } else if (key == "kappa") {
      kappa = parse_double(value, key, line);
    } else if (key == "kappa_out") {
      kappa_out = parse_double(value, key, line);
    } else if (key == "gamma_m") {
      gamma_m = parse_double(value, key, line);
    } else if (key == "g0") {
      g0 = parse_double(value, key, line);
    } else if (key == "n_th") {
      n_th = parse_double(value, key, line);
    } else if (key == "eps_c") {
      eps_c = parse_double(value, key, line);
    } else if (key == "eps_p") {
      eps_p = parse_double(value, key, line);
    } else if (key == "delta_c") {
      delta_c = parse_double(value, key, line);
    } else if (key == "delta_p") {
      delta_p = parse_double(value, key, line);
    } else if (key == "method") {
      method = value;
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_long(value, key, line));
      if (cfg.threads < 1) {
        throw ConfigError(origin + ": threads must be >= 1", line);
      }
    } else if (key == "truncation_ceiling") {
      cfg.truncation_ceiling = parse_long(value, key, line);
      if (cfg.truncation_ceiling < 4) {
        throw ConfigError(origin + ": truncation_ceiling too small", line);
      }
    } else if (key == "convergence_tol") {
      cfg.convergence_tol = parse_double(value, key, line);
      if (cfg.convergence_tol <= 0.0) {
        throw ConfigError(origin + ": convergence_tol must be > 0", line);
      }
    } else if (key == "window_periods") {
      cfg.window_periods = static_cast<int>(parse_long(value, key, line));
      if (cfg.window_periods < 1) {
        throw ConfigError(origin + ": window_periods must be >= 1", line);
      }
    } else if (key == "dt") {
      cfg.dt = parse_double(value, key, line);
      if (cfg.dt < 0.0) {
        throw ConfigError(origin + ": dt must be >= 0", line);
      }
    } else if (key == "grid_min") {
      cfg.grid_min = parse_double(value, key, line);
    } else if (key == "grid_max") {
      cfg.grid_max = parse_double(value, key, line);
    } else if (key == "grid_step") {
      cfg.grid_step = parse_double(value, key, line);
    } else if (key == "ratios") {
      ratios = parse_list(value, key, line);
    } else if (key == "n_th_values") {
      n_th_values = parse_list(value, key, line);
    } else if (key == "t_switch") {
      cfg.t_switch = parse_double(value, key, line);
    } else if (key == "t_hold") {
      cfg.t_hold = parse_double(value, key, line);
    } else {
      throw ConfigError(origin + ": unknown key '" + key + "'", line);
    }
  }

  if (!experiment) {
    throw ConfigError(origin + ": missing required key 'experiment'");
  }
  cfg.experiment = *experiment;
  if (std::find(kExperimentNames.begin(), kExperimentNames.end(),
                cfg.experiment) == kExperimentNames.end()) {
    throw ConfigError(origin + ": unknown experiment '" + cfg.experiment + "'",
                      seen["experiment"]);
  }
  for (const char* required : {"kappa", "gamma_m", "g0", "eps_c", "delta_c"}) {
    if (!seen.count(required)) {
      throw ConfigError(origin + ": missing required key '" +
                        std::string(required) + "'");
    }
  }
  cfg.params.kappa = *kappa;
  cfg.params.gamma_m = *gamma_m;
  cfg.params.g0 = *g0;
  cfg.params.eps_c = *eps_c;
  cfg.params.delta_c = *delta_c;
  cfg.params.kappa_out = kappa_out.value_or(0.5 * cfg.params.kappa);
  cfg.params.n_th = n_th.value_or(0.0);
  cfg.params.eps_p = eps_p.value_or(cfg.params.eps_c / 10.0);
  cfg.params.delta_p = delta_p.value_or(0.0);
  if (method) {
    if (*method == "linear-response") {
      cfg.method = SidebandMethod::LinearResponse;
    } else if (*method == "time-domain") {
      cfg.method = SidebandMethod::TimeDomain;
    } else {
      throw ConfigError(origin + ": method must be 'linear-response' or "
                                 "'time-domain'",
                        seen["method"]);
    }
  }
  if (ratios) cfg.ratios = *ratios;
  if (n_th_values) cfg.n_th_values = *n_th_values;

  try {
    cfg.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  const bool has_grid = cfg.grid_min || cfg.grid_max || cfg.grid_step;
  const bool full_grid = cfg.grid_min && cfg.grid_max && cfg.grid_step;
  if (has_grid && !full_grid) {
    throw ConfigError(origin +
                      ": grid_min, grid_max and grid_step must be given "
                      "together");
  }
  if (cfg.experiment == "custom_spectrum" && !full_grid) {
    throw ConfigError(origin + ": custom_spectrum requires grid_min, "
                               "grid_max and grid_step");
  }
  if (has_grid && (cfg.experiment == "crossover_sideband1" ||
                   cfg.experiment == "crossover_sideband2" ||
                   cfg.experiment == "temperature_sweep" ||
                   cfg.experiment == "transistor")) {
    throw ConfigError(origin + ": grid overrides are not supported for " +
                      cfg.experiment);
  }
  if (full_grid) {
    if (*cfg.grid_step <= 0.0 || *cfg.grid_max <= *cfg.grid_min) {
      throw ConfigError(origin + ": need grid_max > grid_min and "
                                 "grid_step > 0");
    }
  }
  if (cfg.t_switch <= 0.0) {
    throw ConfigError(origin + ": t_switch must be > 0");
  }
  if (cfg.t_hold < 0.0) {
    throw ConfigError(origin + ": t_hold must be >= 0");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  return load(in, path.filename().string());
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  out += "experiment = " + experiment + "\n";
  out += "kappa = " + format_full(params.kappa) + "\n";
  out += "kappa_out = " + format_full(params.kappa_out) + "\n";
  out += "gamma_m = " + format_full(params.gamma_m) + "\n";
  out += "g0 = " + format_full(params.g0) + "\n";
  out += "n_th = " + format_full(params.n_th) + "\n";
  out += "eps_c = " + format_full(params.eps_c) + "\n";
  out += "eps_p = " + format_full(params.eps_p) + "\n";
  out += "delta_c = " + format_full(params.delta_c) + "\n";
  out += "delta_p = " + format_full(params.delta_p) + "\n";
  out += "method = " + to_string(method) + "\n";
  out += "threads = " + std::to_string(threads) + "\n";
  out += "truncation_ceiling = " + std::to_string(truncation_ceiling) + "\n";
  out += "convergence_tol = " + format_full(convergence_tol) + "\n";
  out += "window_periods = " + std::to_string(window_periods) + "\n";
  out += "dt = " + format_full(dt) + "\n";
  if (grid_min && grid_max && grid_step) {
    out += "grid_min = " + format_full(*grid_min) + "\n";
    out += "grid_max = " + format_full(*grid_max) + "\n";
    out += "grid_step = " + format_full(*grid_step) + "\n";
  }
  if (experiment == "crossover_sideband1" ||
      experiment == "crossover_sideband2") {
    out += "ratios = " + join(ratios) + "\n";
  }
  if (experiment == "temperature_sweep") {
    out += "n_th_values = " + join(n_th_values) + "\n";
  }
  if (experiment == "transistor") {
    out += "t_switch = " + format_full(t_switch) + "\n";
    out += "t_hold = " + format_full(t_hold) + "\n";
  }
  return out;
}

PipelineOptions ExperimentConfig::pipeline_options() const {
  PipelineOptions opts;
  opts.method = method;
  opts.threads = threads;
  opts.truncation_ceiling = truncation_ceiling;
  opts.convergence_tol = convergence_tol;
  opts.window_periods = window_periods;
  opts.integrator.dt = dt;
  return opts;
}

std::string list_experiments() {
  std::string out;
  out += "experiment            reproduces   description\n";
  out += "main_dip              Fig. 2(b)    resonant OMIT dip: quantum vs "
         "classical and modified-classical transmission\n";
  out += "transistor            Fig. 3       pulsed control drive: "
         "time-resolved transmission and state populations\n";
  out += "crossover_sideband1   Fig. 4(a)    first-sideband OMIT signal "
         "across g0/kappa at fixed g0*eps_c\n";
  out += "crossover_sideband2   Fig. 4(b)    second-sideband OMIT signal "
         "across g0/kappa at fixed g0*eps_c\n";
  out += "temperature_sweep     Fig. 4(c)    second-sideband Fano amplitude "
         "versus thermal occupancy\n";
  out += "custom_spectrum       -            probe spectrum over a "
         "user-defined window\n";
  return out;
}

namespace {

std::vector<double> build_grid(const ExperimentConfig& cfg) {
  if (cfg.grid_min) {
    const double lo = *cfg.grid_min;
    const double hi = *cfg.grid_max;
    const double step = *cfg.grid_step;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (n < 2) {
      throw ConfigError("grid has fewer than 2 points");
    }
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = lo + i * step;
    return grid;
  }
  return main_dip_grid(cfg.params);
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IntegrationFailureError("cannot open output file '" + path.string() +
                                  "'");
  }
  out << body;
  if (!out) {
    throw IntegrationFailureError("failed writing '" + path.string() + "'");
  }
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string body =
      "delta_p,transmission_quantum,transmission_classical,"
      "transmission_modified_classical,omit_signal,harmonic2\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    body += format_cell(s.delta_p[i]);
    body += ",";
    body += format_cell(s.transmission_quantum[i]);
    body += ",";
    body += format_cell(s.transmission_classical[i]);
    body += ",";
    body += format_cell(s.transmission_modified_classical[i]);
    body += ",";
    body += format_cell(s.omit_signal.empty() ? 0.0 : s.omit_signal[i]);
    body += ",";
    body += format_cell(s.harmonic2[i]);
    body += "\n";
  }
  return body;
}

std::string space_note(const ModeSpace& s) {
  return "Na=" + std::to_string(s.n_photon_levels) +
         " Nb=" + std::to_string(s.n_phonon_levels);
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& config,
                         const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  if (!std::filesystem::is_directory(out_dir)) {
    throw ConfigError("output directory '" + out_dir.string() +
                      "' is not writable");
  }

  const PipelineOptions opts = config.pipeline_options();
  RunOutput output;
  std::vector<std::string> space_notes;

  auto emit = [&](const std::filesystem::path& name, const std::string& body) {
    const auto path = out_dir / name;
    write_text(path, body);
    output.files.push_back(path);
  };

  if (config.experiment == "main_dip" ||
      config.experiment == "custom_spectrum") {
    const std::vector<double> grid = build_grid(config);
    const SpectrumResult s = omit_signal(config.params, grid, opts);
    emit("spectrum.csv", spectrum_csv(s));
    space_notes.push_back(space_note(s.spaces.front()));
  } else if (config.experiment == "crossover_sideband1" ||
             config.experiment == "crossover_sideband2") {
    const int sideband = config.experiment.back() == '1' ? 1 : 2;
    const CrossoverResult r =
        crossover_sweep(config.params, config.ratios, sideband, opts);
    for (const auto& entry : r.entries) {
      emit("spectrum_ratio_" + std::string(format_label(entry.ratio)) + ".csv",
           spectrum_csv(entry.spectrum));
      space_notes.push_back("g0/kappa=" + std::string(format_label(entry.ratio)) +
                            ": " + space_note(entry.spectrum.spaces.front()));
    }
    std::string classical = "delta_p,classical_signal\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      classical += format_cell(r.grid[i]);
      classical += ",";
      classical += format_cell(r.classical_signal[i]);
      classical += "\n";
    }
    emit("classical_signal.csv", classical);

    std::vector<std::pair<double, double>> amplitudes;
    for (const auto& entry : r.entries) {
      amplitudes.emplace_back(
          entry.ratio,
          fano_amplitude(entry.spectrum, r.grid.front(), r.grid.back()));
    }
    std::sort(amplitudes.begin(), amplitudes.end());
    std::string fano = "g0_over_kappa,fano_amplitude\n";
    for (const auto& [ratio, amp] : amplitudes) {
      fano += format_cell(ratio);
      fano += ",";
      fano += format_cell(amp);
      fano += "\n";
    }
    emit("fano_amplitudes.csv", fano);
  } else if (config.experiment == "temperature_sweep") {
    const TemperatureSweepResult r =
        temperature_sweep(config.params, config.n_th_values, opts);
    for (std::size_t i = 0; i < r.n_th_values.size(); ++i) {
      emit("spectrum_nth_" + std::string(format_label(r.n_th_values[i])) +
               ".csv",
           spectrum_csv(r.spectra[i]));
      space_notes.push_back(
          "n_th=" + std::string(format_label(r.n_th_values[i])) + ": " +
          space_note(r.spectra[i].spaces.front()));
    }
    std::vector<std::size_t> order(r.n_th_values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r.n_th_values[a] < r.n_th_values[b];
    });
    std::string fano = "n_th,fano_amplitude,amplitude_relative_to_nth0\n";
    const double base_amp = r.fano_amplitudes[order.front()];
    for (std::size_t i : order) {
      fano += format_cell(r.n_th_values[i]);
      fano += ",";
      fano += format_cell(r.fano_amplitudes[i]);
      fano += ",";
      fano += format_cell(base_amp != 0.0 ? r.fano_amplitudes[i] / base_amp
                                          : 0.0);
      fano += "\n";
    }
    emit("fano_vs_nth.csv", fano);
  } else if (config.experiment == "transistor") {
    const double hold =
        config.t_hold > 0.0
            ? config.t_hold
            : std::max(10.0 / config.params.gamma_m,
                       10.0 / config.params.kappa);
    const DriveSchedule schedule =
        DriveSchedule::linear_power_pulse(config.t_switch, hold);
    const TransistorResult r =
        transistor_run(config.params, schedule, opts);
    space_notes.push_back(space_note(r.space));

    std::string body =
        "t,transmission,control_power,p00,p01,p10,p11,photon_number,"
        "phonon_number\n";
    for (std::size_t i = r.first_valid; i < r.times.size(); ++i) {
      body += format_cell(r.times[i]);
      body += ",";
      body += format_cell(r.transmission[i]);
      body += ",";
      body += format_cell(r.control_power[i]);
      body += ",";
      body += format_cell(r.p00[i]);
      body += ",";
      body += format_cell(r.p01[i]);
      body += ",";
      body += format_cell(r.p10[i]);
      body += ",";
      body += format_cell(r.p11[i]);
      body += ",";
      body += format_cell(r.photon_number[i]);
      body += ",";
      body += format_cell(r.phonon_number[i]);
      body += "\n";
    }
    emit("timeseries.csv", body);

    std::string fits = "quantity,value,status\n";
    auto fit_row = [&](const std::string& name, const ExponentialFit& f) {
      fits += name;
      fits += ",";
      fits += f.ok ? format_cell(f.tau) : "nan";
      fits += ",";
      fits += f.ok ? "ok" : ("fit-failed: " + f.note);
      fits += "\n";
    };
    fit_row("switch_on_tau", r.switch_on);
    fit_row("switch_off_tau", r.switch_off);
    fits += "p10_oscillation_frequency,";
    fits += r.p10_frequency_ok ? format_cell(r.p10_frequency) : "nan";
    fits += ",";
    fits += r.p10_frequency_ok ? "ok" : "fit-failed: too few samples";
    fits += "\n";
    emit("transistor_fits.csv", fits);
  } else {
    throw ConfigError("unknown experiment '" + config.experiment + "'");
  }

  const auto t1 = std::chrono::steady_clock::now();
  output.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  std::string meta;
  meta += "# omitq " + std::string(kVersion) + " run metadata\n";
  meta += "# this file is itself a loadable config; rerunning from it "
          "reproduces the CSV bodies\n";
  meta += "# method: " + to_string(config.method) + "\n";
  for (const auto& note : space_notes) {
    meta += "# converged space: " + note + "\n";
  }
  meta += "# wall seconds: " + format_full(output.wall_seconds) + "\n";
  for (const auto& f : output.files) {
    meta += "# wrote: " + f.filename().string() + "\n";
  }
  meta += config.serialize();
  const auto meta_path = out_dir / "metadata.txt";
  write_text(meta_path, meta);
  output.files.push_back(meta_path);
  return output;
}

}  // namespace omitq
