#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "liouville/errors.hpp"

namespace liouville::cli {

inline constexpr const char* kCommands[] = {"minimize", "sweep-eps", "mean-field", "green", "bubble",
                                            "flow",     "inequalities", "disk", "mesh-info"};

struct RunSpec {
  std::string command;
  int level = 4;
  std::filesystem::path mesh_file;
  std::uint64_t metric_seed = 7;
  double metric_amplitude = 0.0;
  int metric_bands = 2;
  std::vector<double> eps{0.5};
  std::filesystem::path output_dir;  // empty: ./liouville_out (mesh-info writes nothing)
  std::uint64_t seed = 1;
  double tolerance = -1.0;  // < 0: command default
  int max_iterations = -1;  // < 0: command default
  // bubble
  double R = 1.0;
  int quadrature_n = 1001;
  std::filesystem::path field_file;
  // green
  int pole = 0;
  // flow
  double t_end = 10.0;
  double dt = 0.01;
  double flow_amplitude = 0.3;
  // inequalities
  int samples = 200;
  int trials = 20;
  // disk
  double a = 2.0 * 3.14159265358979323846;
  double b = 0.0;
  double r = 1.0;
  int grid_n = 512;
  bool plots = true;

  void validate() const;
};

/// Flags override `key = value` lines from --config; unknown keys are
/// rejected. Throws ParameterError; returns false when help was printed.
bool parse_args(int argc, const char* const* argv, RunSpec& spec, std::ostream& out);

/// Runs one command, writing artifacts under spec.output_dir. Library errors propagate.
void run(const RunSpec& spec, std::ostream& out);

/// 2 for parameter, data, mesh-quality and resolution errors, 3 for
/// convergence, 4 for numeric and stiffness errors.
int exit_code(ErrorKind kind);

/// parse_args + run with error reporting on `err`. Returns the exit status.
int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace liouville::cli
