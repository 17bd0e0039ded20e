#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvmpc/simulator.hpp"
#include "lpvmpc/trajectory.hpp"

namespace lpvmpc {

/// Parse failure carrying the 1-based line number of the offending row.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::string message, std::size_t line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

struct TrajectoryCsv {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> v; ///< empty when the file has no speed column
};

/// Reads the `x,y[,v]` trajectory format; `#` lines are comments.
TrajectoryCsv read_trajectory_csv(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path, const Xy& xy,
                          const std::vector<double>& v = {});

/// Column order of the run-log CSV; fixed contract.
extern const char* const kRunLogHeader;

std::string run_log_to_csv(const RunLog& log);
void write_run_log_csv(const std::filesystem::path& path, const RunLog& log);

/// Reads a run-log CSV back; validates the header and every row width.
RunLog read_run_log_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace lpvmpc
