#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "compactseg/admm.hpp"
#include "compactseg/metrics.hpp"
#include "compactseg/pd_solvers.hpp"
#include "compactseg/region_force.hpp"
#include "compactseg/synth.hpp"

namespace compactseg {

enum class Algorithm { PdTd, PdStd, Admm };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::PdTd, Algorithm::PdStd, Algorithm::Admm};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PdTd: return "pd-td";
    case Algorithm::PdStd: return "pd-std";
    case Algorithm::Admm: return "admm";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "pd-td") return Algorithm::PdTd;
  if (name == "pd-std") return Algorithm::PdStd;
  if (name == "admm") return Algorithm::Admm;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected pd-td, pd-std or admm)");
}

/// Everything needed to run any of the three solvers on an image.
struct ExperimentConfig {
  SolverConfig pd;
  AdmmConfig admm;
  double c1 = 1.0;      ///< foreground mean for the two-phase force
  double c2 = 0.0;      ///< background mean
  int mean_rounds = 0;  ///< extra rounds alternating mean refresh and a solve (at most 5)

  void set_lambda(double lambda) {
    pd.lambda = lambda;
    admm.lambda = lambda;
  }
};

inline SolveReport run_algorithm(Algorithm algo, const ScalarField& f, const ExperimentConfig& cfg) {
  switch (algo) {
    case Algorithm::PdTd: return run_pdtd(f, cfg.pd);
    case Algorithm::PdStd: return run_pdstd(f, cfg.pd);
    case Algorithm::Admm: return run_admm(f, cfg.admm);
  }
  throw ConfigError("unknown algorithm");
}

/// Builds the two-phase force from the image and solves; with mean_rounds > 0
/// the means are refreshed from the previous mask and the solve repeated.
/// Wall time covers all rounds.
inline SolveReport segment_image(Algorithm algo, const ScalarField& image, const ExperimentConfig& cfg) {
  RegionMeans means{cfg.c1, cfg.c2};
  SolveReport rep = run_algorithm(algo, two_phase_force(image, means.foreground, means.background), cfg);
  double total_time = rep.wall_time;
  const int rounds = std::clamp(cfg.mean_rounds, 0, 5);
  for (int r = 0; r < rounds; ++r) {
    const RegionMeans next = update_means(image, rep.mask);
    if (is_degenerate_force(next.foreground, next.background)) break;
    if (next.foreground == means.foreground && next.background == means.background) break;
    means = next;
    rep = run_algorithm(algo, two_phase_force(image, means.foreground, means.background), cfg);
    total_time += rep.wall_time;
  }
  rep.wall_time = total_time;
  return rep;
}

/// One line of a results table.
struct MetricsRow {
  std::string algo;
  double lambda = 0.0;
  double dice = std::numeric_limits<double>::quiet_NaN();
  double iou = std::numeric_limits<double>::quiet_NaN();
  double compactness = std::numeric_limits<double>::quiet_NaN();  ///< NaN for an empty mask
  double energy = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

inline MetricsRow make_row(const SolveReport& rep, double lambda, const BinaryMask* truth) {
  MetricsRow row;
  row.algo = rep.algorithm;
  row.lambda = lambda;
  if (truth) {
    row.dice = dice(rep.mask, *truth);
    row.iou = iou(rep.mask, *truth);
  }
  if (count(rep.mask) > 0) row.compactness = compactness(rep.mask);
  row.energy = rep.energy_trace.empty() ? 0.0 : rep.energy_trace.back().energy;
  row.iters = rep.iters_used;
  row.seconds = rep.wall_time;
  return row;
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Each task writes
/// only its own slot, so output order never depends on scheduling.
template <typename Task>
void run_indexed(std::size_t n, int jobs, Task&& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SweepCell {
  MetricsRow row;
  BinaryMask mask;
};

/// Every algorithm at every lambda. Cells are ordered lambda-major, then
/// pd-td, pd-std, admm.
inline std::vector<SweepCell> run_sweep(const ScalarField& image, const BinaryMask* truth,
                                        const std::vector<double>& lambdas, const ExperimentConfig& base,
                                        int jobs = 1) {
  if (lambdas.empty()) throw ConfigError("sweep needs at least one lambda");
  constexpr std::size_t kAlgos = std::size(kAllAlgorithms);
  std::vector<SweepCell> cells(lambdas.size() * kAlgos);
  run_indexed(cells.size(), jobs, [&](std::size_t i) {
    ExperimentConfig cfg = base;
    const double lambda = lambdas[i / kAlgos];
    cfg.set_lambda(lambda);
    const SolveReport rep = segment_image(kAllAlgorithms[i % kAlgos], image, cfg);
    cells[i] = {make_row(rep, lambda, truth), rep.mask};
  });
  return cells;
}

struct BenchCase {
  std::string name;
  ScalarField image;
  BinaryMask truth;
};

struct BenchSummary {
  std::string algo;
  double mean_dice = 0.0;
  double mean_compactness = 0.0;  ///< over nonempty results
  double mean_seconds = 0.0;
  int cases = 0;
};

struct BenchResult {
  std::vector<MetricsRow> rows;  ///< case-major, algorithms in kAllAlgorithms order
  std::vector<BenchSummary> summary;
};

inline BenchResult run_bench(const std::vector<BenchCase>& cases, const ExperimentConfig& cfg, int jobs = 1) {
  if (cases.empty()) throw ConfigError("bench needs at least one (image, ground truth) pair");
  constexpr std::size_t kAlgos = std::size(kAllAlgorithms);
  BenchResult res;
  res.rows.resize(cases.size() * kAlgos);
  run_indexed(res.rows.size(), jobs, [&](std::size_t i) {
    const BenchCase& c = cases[i / kAlgos];
    require_same_shape(c.image, c.truth, ("bench case " + c.name).c_str());
    const SolveReport rep = segment_image(kAllAlgorithms[i % kAlgos], c.image, cfg);
    res.rows[i] = make_row(rep, cfg.pd.lambda, &c.truth);
  });

  for (std::size_t a = 0; a < kAlgos; ++a) {
    BenchSummary s;
    s.algo = std::string(to_string(kAllAlgorithms[a]));
    int nonempty = 0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const MetricsRow& r = res.rows[c * kAlgos + a];
      s.mean_dice += r.dice;
      s.mean_seconds += r.seconds;
      if (!std::isnan(r.compactness)) {
        s.mean_compactness += r.compactness;
        ++nonempty;
      }
    }
    s.cases = static_cast<int>(cases.size());
    s.mean_dice /= s.cases;
    s.mean_seconds /= s.cases;
    s.mean_compactness = nonempty > 0 ? s.mean_compactness / nonempty : std::numeric_limits<double>::quiet_NaN();
    res.summary.push_back(s);
  }
  return res;
}

/// The bundled synthetic benchmark: ten noisy disks, named disk00..disk09.
inline std::vector<BenchCase> synthetic_bench_cases(std::uint64_t seed = kBundledCorpusSeed, int count = 10) {
  std::vector<BenchCase> out;
  int i = 0;
  for (auto& c : noisy_disk_corpus(count, seed)) {
    std::string name = "disk" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    out.push_back({std::move(name), std::move(c.image), std::move(c.truth)});
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Six significant digits.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline constexpr std::string_view kMetricsHeader = "algo,lambda,dice,iou,compactness,energy,iters,seconds";

inline std::string to_csv_line(const MetricsRow& r) {
  std::ostringstream os;
  os << r.algo << ',' << format_real(r.lambda) << ',' << format_real(r.dice) << ',' << format_real(r.iou) << ','
     << format_real(r.compactness) << ',' << format_real(r.energy) << ',' << r.iters << ','
     << format_real(r.seconds);
  return os.str();
}

inline std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += to_csv_line(r);
    out += '\n';
  }
  return out;
}

inline constexpr std::string_view kSummaryHeader = "algo,mean_dice,mean_compactness,mean_seconds,cases";

inline std::string to_csv(const std::vector<BenchSummary>& rows) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& s : rows) {
    out += s.algo + ',' + format_real(s.mean_dice) + ',' + format_real(s.mean_compactness) + ',' +
           format_real(s.mean_seconds) + ',' + std::to_string(s.cases) + '\n';
  }
  return out;
}

}  // namespace compactseg
