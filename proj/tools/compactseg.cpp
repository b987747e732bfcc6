// compactseg: segmentation with a compactness prior from the command line.
//
//   compactseg segment   --in IMG [--gt MASK] [--algo pd-std] [--out mask.png]
//   compactseg sweep     --in IMG [--gt MASK] --lambdas 2,1,0.5 --out DIR
//   compactseg bench     (--in DIR | --synthetic N) [--out DIR]
//   compactseg calibrate [--sigma 2] [--kernel-n 6]
//   compactseg synth     --kind corpus|blob|disk --out DIR
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 solver failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "compactseg/compactseg.hpp"
#include "image_io.hpp"

namespace fs = std::filesystem;
using namespace compactseg;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kSolver = 3 };

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raw flag values. Solver defaults come from the library structs.
struct Options {
  std::string algo = "pd-std";
  ExperimentConfig exp;
  int iters = 0;
  double stop_tol = 0.0;
  std::string in, gt, out, soft_out, metrics, config, lambdas = "2,1,0.5,0.2,0.1";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool trace = false;
  double noise_sd = 0.0, salt_pepper = 0.0;
  int synthetic = 0;
  int grid = 128;
  std::string kind = "corpus";
  int count = 10, size = 96;
};

void add_solver_options(CLI::App* app, Options& o) {
  SolverConfig& pd = o.exp.pd;
  AdmmConfig& admm = o.exp.admm;
  app->add_option("--algo", o.algo, "pd-td, pd-std or admm")->capture_default_str();
  app->add_option("--lambda", pd.lambda, "fidelity weight")->capture_default_str();
  app->add_option("--epsilon", pd.epsilon, "entropy weight (pd-std)")->capture_default_str();
  app->add_option("--tau", pd.tau, "dual proximal step (pd-std); inf allowed")->capture_default_str();
  app->add_option("--sigma", pd.sigma, "kernel standard deviation, pixels")->capture_default_str();
  app->add_option("--kernel-n", pd.kernel_half_width, "kernel half width; 0 selects ceil(3 sigma)")
      ->capture_default_str();
  app->add_option("--iters", o.iters, "iteration cap for every solver");
  app->add_option("--stop-tol", o.stop_tol, "stopping tolerance for pd-std and admm");
  app->add_option("--initial-dual", pd.initial_dual, "override the initial dual variable");
  app->add_option("--mu1", admm.mu1, "admm penalty on u = z")->capture_default_str();
  app->add_option("--mu2", admm.mu2, "admm penalty on the area constraint")->capture_default_str();
  app->add_option("--c1", o.exp.c1, "foreground mean")->capture_default_str();
  app->add_option("--c2", o.exp.c2, "background mean")->capture_default_str();
  app->add_option("--mean-rounds", o.exp.mean_rounds, "refresh the means from the result and re-solve (max 5)")
      ->capture_default_str();
  app->add_option("--seed", o.seed, "seed for every random draw")->capture_default_str();
  app->add_option("--config", o.config, "flat key = value file; flags win");
}

/// Copies the shared flags into both solver configs and validates them.
void finish_config(CLI::App* app, Options& o) {
  SolverConfig& pd = o.exp.pd;
  AdmmConfig& admm = o.exp.admm;
  admm.lambda = pd.lambda;
  admm.sigma = pd.sigma;
  admm.kernel_half_width = pd.kernel_half_width;
  if (app->count("--iters") > 0) {
    pd.max_iters = o.iters;
    admm.max_iters = o.iters;
  }
  if (app->count("--stop-tol") > 0) {
    pd.stop_tol = o.stop_tol;
    admm.tol = o.stop_tol;
  }
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  pd.validate();
  admm.validate();
  if (o.exp.c1 == o.exp.c2) throw ConfigError("--c1 and --c2 must differ");
}

/// Turns "key = value" lines into "--key=value" arguments. Underscores in
/// keys are read as dashes.
std::vector<std::string> config_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open config file '" + path.string() + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (key == "config") throw ConfigError(path.string() + ": config files cannot include other config files");
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

/// Finds --config in argv and splices its entries in ahead of the command
/// line flags, so later (command line) values win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> from_file = config_arguments(path);
  args.insert(args.begin() + 1, from_file.begin(), from_file.end());
  return args;
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad lambda '" + item + "' in --lambdas");
    }
  }
  if (out.empty()) throw ConfigError("--lambdas is empty");
  for (double v : out) {
    if (!(v > 0.0)) throw ConfigError("every lambda must be > 0");
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw io::IoError("write failed for '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw io::IoError("cannot create directory '" + dir.string() + "'");
}

ScalarField load_input(const Options& o) {
  ScalarField image = io::read_image(o.in);
  if (o.noise_sd > 0.0) image = add_gaussian_noise(image, o.noise_sd, o.seed);
  if (o.salt_pepper > 0.0) image = add_salt_pepper(image, o.salt_pepper, o.seed + 1);
  return image;
}

std::string trace_csv(const SolveReport& rep) {
  std::string out = "iter,energy,lagrangian,dual\n";
  for (const TraceEntry& t : rep.energy_trace) {
    out += std::to_string(t.iter) + ',' + format_real(t.energy) + ',' + format_real(t.lagrangian) + ',' +
           format_real(t.dual) + '\n';
  }
  return out;
}

int cmd_segment(const Options& o) {
  const Algorithm algo = parse_algorithm(o.algo);
  const ScalarField image = load_input(o);
  std::optional<BinaryMask> truth;
  if (!o.gt.empty()) {
    truth = io::read_mask(o.gt);
    require_same_shape(image, *truth, "--in and --gt");
  }

  const SolveReport rep = segment_image(algo, image, o.exp);
  if (rep.empty_region || count(rep.mask) == 0) {
    throw SolverFailure(std::string(to_string(algo)) + " produced an empty region; try a larger --lambda");
  }

  io::write_mask(o.out, rep.mask);
  if (!o.soft_out.empty()) io::write_image(o.soft_out, rep.soft_u);

  const std::string table = to_csv({make_row(rep, o.exp.pd.lambda, truth ? &*truth : nullptr)});
  if (!o.metrics.empty()) write_text(o.metrics, table);
  std::cout << table;
  if (o.trace) std::cout << '\n' << trace_csv(rep);
  return kOk;
}

std::string mask_name(const MetricsRow& row) { return row.algo + "_lambda_" + format_real(row.lambda) + ".png"; }

int cmd_sweep(const Options& o) {
  const std::vector<double> lambdas = parse_lambda_list(o.lambdas);
  const ScalarField image = load_input(o);
  std::optional<BinaryMask> truth;
  if (!o.gt.empty()) {
    truth = io::read_mask(o.gt);
    require_same_shape(image, *truth, "--in and --gt");
  }
  const fs::path dir = o.out;
  make_dir(dir / "masks");

  const std::vector<SweepCell> cells = run_sweep(image, truth ? &*truth : nullptr, lambdas, o.exp, o.jobs);
  std::vector<MetricsRow> rows;
  for (const SweepCell& c : cells) {
    rows.push_back(c.row);
    io::write_mask(dir / "masks" / mask_name(c.row), c.mask);
  }
  const std::string table = to_csv(rows);
  write_text(dir / "sweep.csv", table);
  std::cout << table;
  return kOk;
}

/// Pairs NAME.png|pgm with NAME_gt.png|pgm in a directory, sorted by name.
std::vector<BenchCase> load_bench_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw io::IoError("'" + dir.string() + "' is not a directory");
  std::map<std::string, fs::path> images, truths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    auto& slot = stem.size() > 3 && stem.ends_with("_gt") ? truths[stem.substr(0, stem.size() - 3)] : images[stem];
    if (!slot.empty()) throw io::IoError("two files for '" + stem + "' in '" + dir.string() + "'");
    slot = entry.path();
  }
  if (images.empty() && truths.empty()) throw io::IoError("no images in '" + dir.string() + "'");
  for (const auto& [name, path] : truths) {
    if (!images.contains(name)) throw io::IoError("ground truth '" + path.string() + "' has no image");
  }
  std::vector<BenchCase> cases;
  for (const auto& [name, path] : images) {
    const auto t = truths.find(name);
    if (t == truths.end()) throw io::IoError("image '" + path.string() + "' has no NAME_gt ground truth");
    BenchCase c{name, io::read_image(path), io::read_mask(t->second)};
    require_same_shape(c.image, c.truth, ("pair " + name).c_str());
    cases.push_back(std::move(c));
  }
  return cases;
}

int cmd_bench(const Options& o) {
  if (o.in.empty() == (o.synthetic == 0)) throw ConfigError("bench needs exactly one of --in DIR or --synthetic N");
  const std::vector<BenchCase> cases =
      o.synthetic > 0 ? synthetic_bench_cases(o.seed, o.synthetic) : load_bench_dir(o.in);
  const BenchResult res = run_bench(cases, o.exp, o.jobs);

  const std::string summary = to_csv(res.summary);
  if (!o.out.empty()) {
    const fs::path dir = o.out;
    make_dir(dir);
    std::string rows = "case," + std::string(kMetricsHeader) + '\n';
    const std::size_t algos = std::size(kAllAlgorithms);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      rows += cases[i / algos].name + ',' + to_csv_line(res.rows[i]) + '\n';
    }
    write_text(dir / "bench_rows.csv", rows);
    write_text(dir / "bench_summary.csv", summary);
  }
  std::cout << summary;
  return kOk;
}

int cmd_calibrate(const Options& o) {
  const GaussianKernel k = o.exp.pd.kernel();
  const double c = calibrate_perimeter_constant(k, o.grid);
  std::cout << "sigma,kernel_n,grid,constant\n"
            << format_real(k.sigma()) << ',' << k.half_width() << ',' << o.grid << ',' << format_real(c) << '\n';
  return kOk;
}

int cmd_synth(const Options& o) {
  const fs::path dir = o.out;
  make_dir(dir);
  if (o.kind == "corpus") {
    for (const BenchCase& c : synthetic_bench_cases(o.seed, o.count)) {
      io::write_image(dir / (c.name + ".png"), c.image);
      io::write_mask(dir / (c.name + "_gt.png"), c.truth);
    }
  } else if (o.kind == "blob") {
    const SyntheticCase c = protrusion_blob_case(o.size);
    io::write_image(dir / "blob.png", c.image);
    io::write_mask(dir / "blob_gt.png", c.truth);
  } else if (o.kind == "disk") {
    const double centre = (o.size - 1) / 2.0;
    const BinaryMask truth = disk_mask(o.size, o.size, centre, centre, o.size / 4.0);
    io::write_image(dir / "disk.png", to_field(truth));
    io::write_mask(dir / "disk_gt.png", truth);
  } else {
    throw ConfigError("unknown --kind '" + o.kind + "' (expected corpus, blob or disk)");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Binary segmentation with a squared-perimeter-over-area shape prior", "compactseg"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CLI::App* segment = app.add_subcommand("segment", "segment one image");
  add_solver_options(segment, o);
  segment->add_option("--in", o.in, "input image (PNG or PGM)")->required();
  segment->add_option("--gt", o.gt, "ground-truth mask for metrics");
  segment->add_option("--out", o.out, "output mask")->capture_default_str();
  segment->add_option("--soft-out", o.soft_out, "also write the relaxed labels");
  segment->add_option("--metrics", o.metrics, "also write the metrics CSV here");
  segment->add_option("--noise-sd", o.noise_sd, "add seeded Gaussian noise to the input");
  segment->add_option("--salt-pepper", o.salt_pepper, "add seeded salt-and-pepper noise to the input");
  segment->add_flag("--trace", o.trace, "print the per-iteration trace after the metrics");
  o.out = "mask.png";

  CLI::App* sweep = app.add_subcommand("sweep", "all algorithms over a lambda grid");
  add_solver_options(sweep, o);
  sweep->add_option("--in", o.in, "input image")->required();
  sweep->add_option("--gt", o.gt, "ground-truth mask");
  sweep->add_option("--lambdas", o.lambdas, "comma-separated lambda grid")->capture_default_str();
  sweep->add_option("--out", o.out, "output directory")->required();
  sweep->add_option("--noise-sd", o.noise_sd, "add seeded Gaussian noise to the input");
  sweep->add_option("--salt-pepper", o.salt_pepper, "add seeded salt-and-pepper noise to the input");
  sweep->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();

  CLI::App* bench = app.add_subcommand("bench", "mean metrics per algorithm over image pairs");
  add_solver_options(bench, o);
  bench->add_option("--in", o.in, "directory of NAME.png + NAME_gt.png pairs");
  bench->add_option("--synthetic", o.synthetic, "use N seeded noisy disks instead of a directory");
  bench->add_option("--out", o.out, "directory for bench_rows.csv and bench_summary.csv");
  bench->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();

  CLI::App* calibrate = app.add_subcommand("calibrate", "print the perimeter calibration constant");
  calibrate->add_option("--sigma", o.exp.pd.sigma, "kernel standard deviation")->capture_default_str();
  calibrate->add_option("--kernel-n", o.exp.pd.kernel_half_width, "kernel half width; 0 selects ceil(3 sigma)");
  calibrate->add_option("--grid", o.grid, "calibration grid size")->capture_default_str();
  calibrate->add_option("--config", o.config, "flat key = value file; flags win");

  CLI::App* synth = app.add_subcommand("synth", "write the bundled synthetic images");
  synth->add_option("--kind", o.kind, "corpus, blob or disk")->capture_default_str();
  synth->add_option("--out", o.out, "output directory")->required();
  synth->add_option("--seed", o.seed, "corpus seed")->capture_default_str();
  synth->add_option("--count", o.count, "corpus size")->capture_default_str();
  synth->add_option("--size", o.size, "grid size for blob and disk")->capture_default_str();
  synth->add_option("--config", o.config, "flat key = value file; flags win");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "compactseg: " << e.what() << '\n';
    return kUsage;
  } catch (const io::IoError& e) {
    std::cerr << "compactseg: " << e.what() << '\n';
    return kIo;
  }

  try {
    if (segment->parsed()) {
      finish_config(segment, o);
      return cmd_segment(o);
    }
    if (sweep->parsed()) {
      finish_config(sweep, o);
      return cmd_sweep(o);
    }
    if (bench->parsed()) {
      finish_config(bench, o);
      return cmd_bench(o);
    }
    if (calibrate->parsed()) return cmd_calibrate(o);
    if (synth->parsed()) return cmd_synth(o);
  } catch (const ConfigError& e) {
    std::cerr << "compactseg: " << e.what() << '\n';
    return kUsage;
  } catch (const io::IoError& e) {
    std::cerr << "compactseg: " << e.what() << '\n';
    return kIo;
  } catch (const DimensionMismatch& e) {
    std::cerr << "compactseg: " << e.what() << '\n';
    return kIo;
  } catch (const EmptyRegion& e) {
    std::cerr << "compactseg: solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const SolverFailure& e) {
    std::cerr << "compactseg: solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "compactseg: solver failure: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}
