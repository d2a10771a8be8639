#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gaitsync/clock.hpp"
#include "gaitsync/experiment.hpp"
#include "gaitsync/gait.hpp"
#include "gaitsync/report.hpp"

namespace py = pybind11;
using namespace gaitsync;

namespace {

py::list samples_of(const ErrorTrace& t) {
  py::list out;
  for (const auto& s : t.samples) out.append(py::make_tuple(s.true_time.seconds(), s.period_index, s.error_us));
  return out;
}

std::vector<double> marks_of(const ErrorTrace& t) {
  std::vector<double> out;
  for (auto m : t.resync_marks) out.push_back(m.seconds());
  return out;
}

}  // namespace

PYBIND11_MODULE(_gaitsync, m) {
  m.doc() = "Hexapod gait synchronization over a TSCH network: clocks, resync, experiments";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<HarnessError>(m, "HarnessError", PyExc_RuntimeError);

  m.attr("TICK_US") = kTickUs;

  py::class_<DriftingClock>(m, "DriftingClock")
      .def(py::init([](double ppm, Ticks offset, double epoch_s, double ppm_max) {
             return make_clock(ppm, offset, epoch_s, ppm_max);
           }),
           py::arg("ppm_error"), py::arg("tick_offset") = 0, py::arg("epoch_s") = 0.0,
           py::arg("ppm_max") = kDefaultPpmMax)
      .def_property_readonly("ppm_error", &DriftingClock::ppm_error)
      .def_property_readonly("tick_offset", &DriftingClock::tick_offset)
      .def("ticks_at", [](const DriftingClock& c, double t) { return c.ticks_at(TrueTime::from_seconds(t)); })
      .def("true_time_of_tick", [](const DriftingClock& c, Ticks k) { return c.true_time_of_tick(k).seconds(); })
      .def("local_seconds_at",
           [](const DriftingClock& c, double t) { return c.local_seconds_at(TrueTime::from_seconds(t)); });
  m.def("relative_drift_ppm", &relative_drift_ppm);

  py::enum_<Scheme>(m, "Scheme")
      .value("CENTRALIZED", Scheme::Centralized)
      .value("OPEN_LOOP", Scheme::OpenLoop)
      .value("SYNCHRONIZED", Scheme::Synchronized);
  py::enum_<GaitHealth>(m, "GaitHealth")
      .value("IN_SYNC", GaitHealth::InSync)
      .value("DEGRADED", GaitHealth::Degraded)
      .value("OPPOSED", GaitHealth::Opposed);
  py::enum_<Tripod>(m, "Tripod").value("T1", Tripod::T1).value("T2", Tripod::T2);
  py::enum_<JointGroup>(m, "JointGroup").value("HIP", JointGroup::Hip).value("KNEE", JointGroup::Knee);
  py::enum_<Action>(m, "Action")
      .value("DOWN", Action::Down)
      .value("UP", Action::Up)
      .value("BACK", Action::Back)
      .value("FORWARD", Action::Forward);
  py::enum_<Controller>(m, "Controller").value("M1", Controller::M1).value("M2", Controller::M2);

  py::class_<GaitConfig>(m, "GaitConfig")
      .def(py::init<>())
      .def_readwrite("period_slots", &GaitConfig::period_slots)
      .def_property(
          "period_s", [](const GaitConfig& c) { return c.period.seconds(); },
          [](GaitConfig& c, double s) { c.period = TrueTime::from_seconds(s); })
      .def_readwrite("event_offsets", &GaitConfig::event_offsets)
      .def_readwrite("hip_down_deg", &GaitConfig::hip_down_deg)
      .def_readwrite("hip_up_deg", &GaitConfig::hip_up_deg)
      .def_readwrite("knee_back_deg", &GaitConfig::knee_back_deg)
      .def_readwrite("knee_forward_deg", &GaitConfig::knee_forward_deg)
      .def("validate", &GaitConfig::validate)
      .def("slot_offset", &GaitConfig::slot_offset);

  py::class_<GaitEvent>(m, "GaitEvent")
      .def_readonly("phase_index", &GaitEvent::phase_index)
      .def_readonly("tripod", &GaitEvent::tripod)
      .def_readonly("joint_group", &GaitEvent::joint_group)
      .def_readonly("action", &GaitEvent::action)
      .def_readonly("target_angle_deg", &GaitEvent::target_angle_deg);

  m.def("build_schedule", &build_schedule, py::arg("config") = GaitConfig{});
  m.def("events_for_controller", &events_for_controller);
  m.def("classify_gait", &classify_gait, py::arg("error_us"), py::arg("period_s"));
  m.def("time_to_opposition", &time_to_opposition, py::arg("slope_us_per_s"), py::arg("period_s"));
  m.def("analytic_bound_us", &analytic_bound_us, py::arg("relative_ppm"), py::arg("resync_period_s"));

  py::class_<RunParams>(m, "RunParams")
      .def(py::init<>())
      .def_static("defaults_for", &RunParams::defaults_for)
      .def_readwrite("ppm_m1", &RunParams::ppm_m1)
      .def_readwrite("ppm_m2", &RunParams::ppm_m2)
      .def_readwrite("ppm_root", &RunParams::ppm_root)
      .def_readwrite("seed", &RunParams::seed)
      .def_readwrite("gait", &RunParams::gait)
      .def_property(
          "duration_s", [](const RunParams& p) { return p.duration.seconds(); },
          [](RunParams& p, double s) { p.duration = TrueTime::from_seconds(s); })
      .def_property(
          "resync_period_s", [](const RunParams& p) { return p.resync_period.seconds(); },
          [](RunParams& p, double s) { p.resync_period = TrueTime::from_seconds(s); })
      .def_property(
          "jitter_s", [](const RunParams& p) { return p.link.jitter_bound.seconds(); },
          [](RunParams& p, double s) { p.link.jitter_bound = TrueTime::from_seconds(s); })
      .def_property(
          "base_latency_s", [](const RunParams& p) { return p.link.base_latency.seconds(); },
          [](RunParams& p, double s) { p.link.base_latency = TrueTime::from_seconds(s); })
      .def_property(
          "drop_probability", [](const RunParams& p) { return p.link.drop_probability; },
          [](RunParams& p, double v) { p.link.drop_probability = v; });

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_property_readonly("scheme", [](const ExperimentResult& r) { return r.trace.scheme; })
      .def_property_readonly("samples", [](const ExperimentResult& r) { return samples_of(r.trace); })
      .def_property_readonly("resync_marks", [](const ExperimentResult& r) { return marks_of(r.trace); })
      .def_readonly("max_abs_error_us", &ExperimentResult::max_abs_error_us)
      .def_readonly("fitted_slope_us_per_s", &ExperimentResult::fitted_slope_us_per_s)
      .def_readonly("analytic_bound_us", &ExperimentResult::analytic_bound_us)
      .def_readonly("opposition_eta_s", &ExperimentResult::opposition_eta_s)
      .def("to_csv", [](const ExperimentResult& r) {
        std::ostringstream os;
        write_trace_csv(r.trace, os);
        return os.str();
      });

  m.def("run_scheme", &run_scheme, py::arg("scheme"), py::arg("params"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "sweep_resync_period",
      [](const std::vector<double>& periods, const RunParams& p) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& row : sweep_resync_period(periods, p))
          out.emplace_back(row.resync_period_s, row.max_abs_error_us, row.analytic_bound_us);
        return out;
      },
      py::arg("periods_s"), py::arg("params"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"gaitsync"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the gaitsync command line in-process; returns (exit_code, stdout, stderr).");
}
