#include "bipen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "bipen/generators.hpp"

namespace bipen {

Suite parse_suite(const std::string& name) {
  if (name == "table1") return Suite::table1;
  if (name == "table2") return Suite::table2;
  throw std::invalid_argument("unknown suite '" + name + "' (expected table1 or table2)");
}

std::vector<SizeSpec> parse_sizes(const std::string& text) {
  std::vector<SizeSpec> out;
  std::stringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item.empty()) continue;
    std::vector<long long> parts;
    std::stringstream dims(item);
    std::string tok;
    while (std::getline(dims, tok, 'x')) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v < 1) throw std::invalid_argument("bad size entry '" + item + "'");
      parts.push_back(v);
    }
    if (parts.size() != 2 && parts.size() != 3) throw std::invalid_argument("bad size entry '" + item + "'");
    out.push_back({parts[0], parts[1], parts.size() == 3 ? parts[2] : 0});
  }
  if (out.empty()) throw std::invalid_argument("size list is empty");
  return out;
}

unsigned harness_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BIPEN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min(n, static_cast<unsigned>(v));
  }
  return n;
}

ResultRow run_instance(Suite suite, const SizeSpec& size, std::uint64_t seed,
                       const ContinuationSchedule& schedule, const PenaltyRunOptions& run) {
  ResultRow row;
  row.n = size.n;
  row.m = size.m;
  row.l = size.l;
  row.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ContinuationResult res;
    if (suite == Suite::table1) {
      const UncLinQuadInstance inst = gen_unc_instance(size.n, size.m, seed);
      ContinuationOptions opt;
      opt.run = run;
      res = continuation_solve(to_problem(inst), schedule, opt);
    } else {
      if (size.l < 1) throw std::invalid_argument("table2 sizes need three dimensions");
      const ConLinearInstance inst = gen_con_instance(size.n, size.m, size.l, seed);
      ContinuationOptions opt;
      opt.y_reference = inst.y_hat;
      opt.run = run;
      res = continuation_solve(to_problem(inst), schedule, opt);
    }
    row.initial_obj = res.initial_objective;
    row.final_obj = res.final_objective;
    row.rounds = static_cast<int>(res.rounds.size());
    row.grad_evals = res.counters.grad_evals;
    row.prox_evals = res.counters.prox_evals;
    row.lower_gap = res.lower_gap;
    row.feas_norm = res.feas;
    row.converged = res.converged;
    row.cancelled = res.cancelled;
    if (!res.converged) {
      row.error = "not converged";
      for (const RoundRecord& r : res.rounds) {
        if (!r.ok) row.error = "round " + std::to_string(r.k) + ": " + r.status;
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

ExperimentResult run_experiment(Suite suite, const std::vector<SizeSpec>& sizes, int instances_per_size,
                                std::uint64_t seed0, const ExperimentOptions& opt) {
  if (sizes.empty()) throw std::invalid_argument("run_experiment: empty size list");
  if (instances_per_size < 1) throw std::invalid_argument("run_experiment: need at least one instance");
  opt.schedule.validate();

  struct Job {
    SizeSpec size;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const SizeSpec& s : sizes) {
    for (int i = 0; i < instances_per_size; ++i) jobs.push_back({s, seed0 + static_cast<std::uint64_t>(i)});
  }

  ExperimentResult out;
  out.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  PenaltyRunOptions run = continuation_run_options();
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                             std::chrono::duration<double>(opt.time_budget));
  auto expired = [&]() { return opt.time_budget > 0 && std::chrono::steady_clock::now() >= deadline; };
  if (opt.time_budget > 0) run.should_stop = expired;
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      if (expired()) {
        ResultRow& r = out.rows[j];
        r.n = jobs[j].size.n;
        r.m = jobs[j].size.m;
        r.l = jobs[j].size.l;
        r.seed = jobs[j].seed;
        r.cancelled = true;
        r.error = "time budget exhausted before start";
        continue;
      }
      out.rows[j] = run_instance(suite, jobs[j].size, jobs[j].seed, opt.schedule, run);
    }
  };
  const unsigned threads =
      std::min<std::size_t>(opt.threads > 0 ? opt.threads : harness_threads(), jobs.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (std::size_t s = 0; s < sizes.size(); ++s) {
    SizeSummary sum;
    sum.size = sizes[s];
    for (int i = 0; i < instances_per_size; ++i) {
      const ResultRow& r = out.rows[s * static_cast<std::size_t>(instances_per_size) + static_cast<std::size_t>(i)];
      ++sum.instances;
      if (r.converged) ++sum.converged;
      sum.mean_initial += r.initial_obj / instances_per_size;
      sum.mean_final += r.final_obj / instances_per_size;
      sum.max_lower_gap = std::max(sum.max_lower_gap, r.lower_gap);
      sum.max_feas = std::max(sum.max_feas, r.feas_norm);
    }
    out.summaries.push_back(sum);
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "n,m,l,seed,initial_obj,final_obj,rounds,grad_evals,prox_evals,lower_gap,feas_norm,wall_time\n";
  const auto old = out.precision(17);
  for (const ResultRow& r : rows) {
    out << r.n << ',' << r.m << ',' << r.l << ',' << r.seed << ',' << r.initial_obj << ',' << r.final_obj << ','
        << r.rounds << ',' << r.grad_evals << ',' << r.prox_evals << ',' << r.lower_gap << ',' << r.feas_norm
        << ',' << r.wall_time << '\n';
  }
  out.precision(old);
}

void write_summary(std::ostream& out, const std::vector<SizeSummary>& summaries) {
  out << "n,m,l,instances,converged,mean_initial_obj,mean_final_obj,max_lower_gap,max_feas_norm\n";
  const auto old = out.precision(17);
  for (const SizeSummary& s : summaries) {
    out << s.size.n << ',' << s.size.m << ',' << s.size.l << ',' << s.instances << ',' << s.converged << ','
        << s.mean_initial << ',' << s.mean_final << ',' << s.max_lower_gap << ',' << s.max_feas << '\n';
  }
  out.precision(old);
}

}  // namespace bipen
