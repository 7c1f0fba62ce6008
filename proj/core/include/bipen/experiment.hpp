#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bipen/penalty.hpp"

namespace bipen {

enum class Suite { table1, table2 };

Suite parse_suite(const std::string& name);

struct SizeSpec {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index l = 0;  // 0 for table1
};

/// "100x100,200x200" or "100x100x5,200x200x10".
std::vector<SizeSpec> parse_sizes(const std::string& text);

struct ResultRow {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index l = 0;
  std::uint64_t seed = 0;
  double initial_obj = 0.0;
  double final_obj = 0.0;
  int rounds = 0;
  std::uint64_t grad_evals = 0;
  std::uint64_t prox_evals = 0;
  double lower_gap = 0.0;
  double feas_norm = 0.0;
  double wall_time = 0.0;
  bool converged = false;
  bool cancelled = false;
  std::string error;  // non-empty when the run threw
};

struct SizeSummary {
  SizeSpec size;
  int instances = 0;
  int converged = 0;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double max_lower_gap = 0.0;
  double max_feas = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // ordered by (size, seed)
  std::vector<SizeSummary> summaries;
};

struct ExperimentOptions {
  ContinuationSchedule schedule;
  /// 0: read BIPEN_THREADS, falling back to the hardware concurrency.
  unsigned threads = 0;
  /// Wall-clock budget for the whole experiment in seconds; 0 means none.
  /// Runs still going at the deadline are cancelled and reported as errors.
  double time_budget = 0.0;
};

/// Thread count honoring the BIPEN_THREADS cap.
unsigned harness_threads();

/// Instance i of a size uses seed seed0 + i.
ExperimentResult run_experiment(Suite suite, const std::vector<SizeSpec>& sizes, int instances_per_size,
                                std::uint64_t seed0, const ExperimentOptions& opt = {});

/// One instance of either suite, as run by run_experiment.
ResultRow run_instance(Suite suite, const SizeSpec& size, std::uint64_t seed,
                       const ContinuationSchedule& schedule, const PenaltyRunOptions& run = continuation_run_options());

/// Header plus one line per row, doubles with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary(std::ostream& out, const std::vector<SizeSummary>& summaries);

}  // namespace bipen
