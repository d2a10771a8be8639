#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaitsync/experiment.hpp"

namespace gaitsync {

/// Header `true_time_s,period_index,error_us,resync`; time to 6 decimals, error to 3.
void write_trace_csv(const ErrorTrace& trace, std::ostream& out);
void write_trace_csv(const ErrorTrace& trace, const std::filesystem::path& path);

/// Parses the format written above. Resync marks come back as the time of each
/// sample flagged with a resync.
ErrorTrace read_trace_csv(std::istream& in);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_setpoints_csv(const std::vector<ServoSetpoint>& setpoints, std::ostream& out);

/// Human-readable run summary.
void write_summary(const ExperimentResult& r, std::ostream& out);

/// Scatter of error against time. Purely for eyeballing a run.
std::string render_ascii_plot(const ErrorTrace& trace, int width, int height);

/// Entry point of the `gaitsync` tool. Returns 0 on success, 2 on usage errors,
/// 1 on runtime failures.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gaitsync
