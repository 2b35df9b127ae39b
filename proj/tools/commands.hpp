#pragma once

// Command-line front end: argument parsing into a RunConfig and the four
// subcommands (score, fit, bench, gen).

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace arvar::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kUnsupported = 3,
  kNumericFailure = 4,
};

struct RunConfig {
  std::string command;
  std::string input;  ///< CSV for score / fit
  std::string csv;    ///< optional summary CSV for score
  std::string output; ///< gen target file; empty means stdout
  std::uint64_t seed = 0;
  std::size_t runs = 20;
  std::size_t n_test = 900;
  std::size_t n_points = 0;  ///< gen size; 0 uses the dataset default
  std::size_t density_samples = 100000;
  std::string out_dir = ".";
  std::string model = "poly";
  std::vector<std::string> datasets{"G", "Y", "W"};
  std::vector<std::string> estimators{"gp", "ar-nn", "ar-poly"};
  double tol = 1e-6;
  bool drop_constant = true;
  bool plots = false;
  bool timing = false;
};

/// Raised for bad command lines or config documents; carries the exit code.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int code = kInputError)
      : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

/// Thrown by parse_args for --help; what() is the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses argv (without the program name). Dataset, estimator and model names
/// are normalized to their canonical spelling. Throws UsageError or
/// HelpRequested.
RunConfig parse_args(const std::vector<std::string>& args);

/// Canonical JSON (sorted keys, normalized names).
std::string to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + run_command with errors mapped to exit codes; `--help`
/// prints usage and returns 0.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arvar::cli
