#include "gaitsync/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace gaitsync {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return f;
}

void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void write_trace_csv(const ErrorTrace& trace, std::ostream& out) {
  out << "true_time_s,period_index,error_us,resync\n";
  std::vector<TrueTime> marks = trace.resync_marks;
  std::sort(marks.begin(), marks.end());
  auto next_mark = marks.begin();
  for (const auto& s : trace.samples) {
    bool resynced = false;
    while (next_mark != marks.end() && *next_mark <= s.true_time) {
      resynced = true;
      ++next_mark;
    }
    out << format("%.6f,%llu,%.3f,%d\n", s.true_time.seconds(), static_cast<unsigned long long>(s.period_index),
                  s.error_us, resynced ? 1 : 0);
  }
}

void write_trace_csv(const ErrorTrace& trace, const std::filesystem::path& path) {
  auto f = open_for_write(path);
  write_trace_csv(trace, f);
  check_stream(f, path);
}

ErrorTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "true_time_s,period_index,error_us,resync")
    throw std::runtime_error("not an error trace CSV");
  ErrorTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t = 0, err = 0;
    unsigned long long k = 0;
    int resync = 0;
    if (std::sscanf(line.c_str(), "%lf,%llu,%lf,%d", &t, &k, &err, &resync) != 4)
      throw std::runtime_error("malformed trace row: " + line);
    const TrueTime at = TrueTime::from_us(std::llround(t * 1e6));
    trace.samples.push_back(ErrorSample{at, k, err});
    if (resync) trace.resync_marks.push_back(at);
  }
  return trace;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "resync_period_s,max_abs_error_us,analytic_bound_us\n";
  for (const auto& r : rows)
    out << format("%.3f,%.3f,%.3f\n", r.resync_period_s, r.max_abs_error_us, r.analytic_bound_us);
}

void write_setpoints_csv(const std::vector<ServoSetpoint>& setpoints, std::ostream& out) {
  out << "true_time_s,controller,servo_id,angle_deg\n";
  for (const auto& sp : setpoints)
    out << format("%.9f,%s,%d,%.3f\n", sp.true_time.seconds(), sp.controller == Controller::M1 ? "M1" : "M2",
                  sp.servo_id, sp.angle_deg);
}

void write_summary(const ExperimentResult& r, std::ostream& out) {
  const auto& p = r.trace.config;
  out << format("scheme            %s\n", std::string(scheme_name(r.trace.scheme)).c_str());
  out << format("ppm root/m1/m2    %.3f / %.3f / %.3f\n", p.ppm_root, p.ppm_m1, p.ppm_m2);
  out << format("duration          %.3f s\n", p.duration.seconds());
  out << format("samples           %zu\n", r.trace.samples.size());
  if (!r.trace.samples.empty())
    out << format("final error       %.3f us\n", r.trace.samples.back().error_us);
  out << format("max |error|       %.3f us\n", r.max_abs_error_us);
  out << format("fitted slope      %.4f us/s\n", r.fitted_slope_us_per_s);
  if (r.trace.scheme == Scheme::Synchronized) {
    out << format("resync period     %.3f s\n", p.resync_period.seconds());
    out << format("resyncs           %zu\n", r.trace.resync_marks.size());
  }
  if (r.analytic_bound_us) out << format("analytic bound    %.3f us\n", *r.analytic_bound_us);
  if (r.opposition_eta_s)
    out << format("time to opposed   %.0f s (%.2f h)\n", *r.opposition_eta_s, *r.opposition_eta_s / 3600.0);
  if (r.trace.scheme == Scheme::Centralized) out << "note              centralized latency model is synthetic\n";
  const double period_s = r.trace.scheme == Scheme::Synchronized ? p.gait.period_slots * kSlotLength.seconds()
                                                                  : p.gait.period.seconds();
  out << format("gait health       %s\n", std::string(health_name(classify_gait(r.max_abs_error_us, period_s))).c_str());
}

std::string render_ascii_plot(const ErrorTrace& trace, int width, int height) {
  if (width < 8 || height < 8) throw ConfigError("plot needs width and height of at least 8");
  std::vector<std::string> grid(height, std::string(width, ' '));

  double t0 = 0, t1 = 1, lo = -1, hi = 1;
  if (!trace.samples.empty()) {
    t0 = trace.samples.front().true_time.seconds();
    t1 = trace.samples.back().true_time.seconds();
    lo = hi = trace.samples.front().error_us;
    for (const auto& s : trace.samples) {
      lo = std::min(lo, s.error_us);
      hi = std::max(hi, s.error_us);
    }
  }
  if (t1 <= t0) t1 = t0 + 1;
  if (hi - lo < 1e-9) {
    lo -= 1;
    hi += 1;
  }
  auto row_of = [&](double v) {
    return static_cast<int>(std::lround((hi - v) / (hi - lo) * (height - 1)));
  };
  if (lo <= 0 && hi >= 0) std::fill(grid[row_of(0.0)].begin(), grid[row_of(0.0)].end(), '-');
  for (const auto& s : trace.samples) {
    const int col = static_cast<int>(std::lround((s.true_time.seconds() - t0) / (t1 - t0) * (width - 1)));
    grid[row_of(s.error_us)][col] = '*';
  }

  std::ostringstream os;
  const std::string top = format("%10.1f", hi), bottom = format("%10.1f", lo), blank(10, ' ');
  for (int r = 0; r < height; ++r) os << (r == 0 ? top : r == height - 1 ? bottom : blank) << " |" << grid[r] << "\n";
  os << blank << " +" << std::string(width, '-') << "\n";
  os << blank << "  " << format("%-*.1f", width / 2, t0) << format("%*.1f", width - width / 2, t1) << "\n";
  os << "error (us) vs time (s): min " << format("%.3f", lo) << ", max " << format("%.3f", hi) << "\n";
  return os.str();
}

namespace {

struct CliOptions {
  std::string scheme = "synchronized";
  double duration_s = 400.0;
  std::optional<double> ppm_m1;
  double ppm_m2 = 0.0;
  double ppm_root = 0.0;
  double ppm_max = kDefaultPpmMax;
  double resync_period_s = 30.0;
  double period_s = 1.0;
  std::uint32_t period_slots = 68;
  std::uint64_t seed = 1;
  double jitter_s = 0.015;
  double base_latency_s = 0.0;
  double drop_probability = 0.0;
  std::uint32_t sample_every = 1;
  std::string out;
  bool plot = false;
  std::vector<double> periods{30.0, 10.0};
  std::vector<std::string> commands;
};

RunParams to_params(const CliOptions& o, Scheme scheme) {
  RunParams p = RunParams::defaults_for(scheme);
  if (o.ppm_m1) p.ppm_m1 = *o.ppm_m1;
  p.ppm_m2 = o.ppm_m2;
  p.ppm_root = o.ppm_root;
  p.ppm_max = o.ppm_max;
  p.duration = TrueTime::from_seconds(o.duration_s);
  p.resync_period = TrueTime::from_seconds(o.resync_period_s);
  p.seed = o.seed;
  p.gait.period = TrueTime::from_seconds(o.period_s);
  p.gait.period_slots = o.period_slots;
  p.link.jitter_bound = TrueTime::from_seconds(o.jitter_s);
  p.link.base_latency = TrueTime::from_seconds(o.base_latency_s);
  p.link.drop_probability = o.drop_probability;
  if (!(o.duration_s > 0.0)) throw ConfigError("--duration-s must be positive");
  if (!(o.resync_period_s > 0.0)) throw ConfigError("--resync-period-s must be positive");
  if (o.sample_every == 0) throw ConfigError("--sample-every must be at least 1");
  return p;
}

ErrorTrace decimate(ErrorTrace trace, std::uint32_t every) {
  if (every <= 1) return trace;
  std::vector<ErrorSample> kept;
  for (std::size_t i = 0; i < trace.samples.size(); i += every) kept.push_back(trace.samples[i]);
  trace.samples = std::move(kept);
  return trace;
}

Verb parse_verb(const std::string& s) {
  if (s == "start") return Verb::Start;
  if (s == "stop") return Verb::Stop;
  if (s == "forward") return Verb::Forward;
  if (s == "left") return Verb::Left;
  if (s == "right") return Verb::Right;
  throw ConfigError("unknown command verb '" + s + "'");
}

template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  auto f = open_for_write(path);
  write(f);
  check_stream(f, path);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate decentralized hexapod gait control over a time-synchronized wireless network."};
  app.name("gaitsync");
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file of option defaults (flags override)");

  CliOptions o;
  app.add_option("--scheme", o.scheme, "centralized, open-loop or synchronized")
      ->check(CLI::IsMember({"centralized", "open-loop", "synchronized"}))
      ->capture_default_str();
  app.add_option("--duration-s", o.duration_s, "simulated seconds")->capture_default_str();
  app.add_option("--ppm-m1", o.ppm_m1, "hip controller crystal error (default -5 open-loop, -3 otherwise)");
  app.add_option("--ppm-m2", o.ppm_m2, "knee controller crystal error")->capture_default_str();
  app.add_option("--ppm-root", o.ppm_root, "root crystal error")->capture_default_str();
  app.add_option("--ppm-max", o.ppm_max, "largest accepted |ppm|")->capture_default_str();
  app.add_option("--resync-period-s", o.resync_period_s, "worst-case keep-alive period")->capture_default_str();
  app.add_option("--period-s", o.period_s, "gait period for clock-timed schemes")->capture_default_str();
  app.add_option("--period-slots", o.period_slots, "gait period in slots for the synchronized scheme")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "link randomness seed")->capture_default_str();
  app.add_option("--jitter-s", o.jitter_s, "upper bound of uniform link jitter")->capture_default_str();
  app.add_option("--base-latency-s", o.base_latency_s, "fixed link latency")->capture_default_str();
  app.add_option("--drop-probability", o.drop_probability, "per-attempt frame loss")->capture_default_str();
  app.add_option("--sample-every", o.sample_every, "keep one error sample per N gait periods")->capture_default_str();
  app.add_option("--out", o.out, "output CSV path (stdout when omitted)");

  auto* run = app.add_subcommand("run", "run one scheme and write its error trace CSV")->fallthrough();
  run->add_flag("--plot", o.plot, "print an ASCII plot of the trace");
  auto* sweep = app.add_subcommand("sweep", "sweep the resync period and write a table CSV")->fallthrough();
  sweep->add_option("--periods", o.periods, "resync periods in seconds")->delimiter(',')->capture_default_str();
  auto* trace = app.add_subcommand("trace", "run one scheme and write the servo setpoint CSV")->fallthrough();
  trace->add_option("--command", o.commands, "extra driver command VERB@SECONDS, e.g. left@50 (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    // Shared options live on the top-level app, so show them for subcommands too.
    const auto selected = app.get_subcommands();
    app.clear();
    out << app.help();
    for (const auto* sub : selected) out << "\n" << sub->help("gaitsync");
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gaitsync: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const Scheme scheme = parse_scheme(o.scheme);
    const RunParams params = to_params(o, scheme);

    if (run->parsed()) {
      const ExperimentResult r = run_scheme(scheme, params);
      const ErrorTrace t = decimate(r.trace, o.sample_every);
      emit(o.out, out, [&](std::ostream& s) { write_trace_csv(t, s); });
      if (!o.out.empty() && o.out != "-") write_summary(r, out);
      if (o.plot) out << render_ascii_plot(t, 72, 16);
    } else if (sweep->parsed()) {
      const auto rows = sweep_resync_period(o.periods, params);
      emit(o.out, out, [&](std::ostream& s) { write_sweep_csv(rows, s); });
    } else if (trace->parsed()) {
      Sim sim(sim_config_for(scheme, params), params.seed);
      sim.inject_command(Verb::Start, TrueTime{});
      for (const std::string& c : o.commands) {
        const auto at = c.find('@');
        if (at == std::string::npos) throw ConfigError("--command expects VERB@SECONDS, got '" + c + "'");
        sim.inject_command(parse_verb(c.substr(0, at)), TrueTime::from_seconds(std::stod(c.substr(at + 1))));
      }
      const auto setpoints = servo_trace(sim, params.duration);
      emit(o.out, out, [&](std::ostream& s) { write_setpoints_csv(setpoints, s); });
    }
  } catch (const ConfigError& e) {
    err << "gaitsync: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "gaitsync: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "gaitsync: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gaitsync
