#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "genesift/config.hpp"
#include "genesift/errors.hpp"
#include "genesift/pipeline.hpp"
#include "genesift/text.hpp"

namespace {

using namespace genesift;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  long long seed = -1;
  bool seed_given = false;
  int jobs = 1;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value configuration file");
  cmd->add_option("--set", opts.sets, "override one config key, e.g. --set firefly.iterations=40")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", opts.seed, "override every section seed")
      ->check(CLI::NonNegativeNumber)
      ->each([&opts](const std::string&) { opts.seed_given = true; });
  cmd->add_option("--jobs", opts.jobs, "parallel worker threads (results are identical at any level)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--print-config", opts.print_config, "echo the fully resolved configuration");
}

ResolvedConfig resolve(const CommonOpts& opts) {
  ResolvedConfig cfg;
  apply_env_seed(cfg);
  if (!opts.config_path.empty()) load_config_file(cfg, opts.config_path);
  for (const auto& setting : opts.sets) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage, "--set expects KEY=VALUE, got '" + setting + "'");
    apply_setting(cfg, setting.substr(0, eq), setting.substr(eq + 1));
  }
  if (opts.seed_given) apply_global_seed(cfg, static_cast<std::uint64_t>(opts.seed));
  cfg.pipeline.jobs = opts.jobs;
  if (opts.print_config) std::cout << print_config(cfg);
  return cfg;
}

SearchAlgorithm parse_algorithm(const std::string& name) {
  if (name == "firefly") return SearchAlgorithm::Firefly;
  if (name == "elephant") return SearchAlgorithm::Elephant;
  throw Error(ErrorKind::Usage, "--algorithm expects firefly or elephant, got '" + name + "'");
}

Dataset load_data(const std::string& path, const ResolvedConfig& cfg) {
  CsvOptions options;
  options.nan_replacement = cfg.nan_replacement;
  return load_csv(path, options);
}

void write_mask_file(const FeatureMask& mask, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (auto idx : mask.selected_indices()) out << idx << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

void append_trace(const std::vector<HistoryPoint>& history, const std::string& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  if (fresh) out << "iteration,best_fitness,popcount\n";
  for (const auto& point : history)
    out << point.iteration << ',' << fmt_double(point.best_fitness) << ',' << point.best_popcount
        << '\n';
}

int cmd_gensynth(std::size_t n, std::size_t d, std::size_t k, int classes, double noise,
                 long long seed, bool seed_given, const std::string& out_path) {
  std::uint64_t use_seed = 1;
  if (seed_given) {
    use_seed = static_cast<std::uint64_t>(seed);
  } else if (const char* env = std::getenv("GENESIFT_SEED")) {
    auto v = parse_int(env);
    if (!v) throw Error(ErrorKind::Config, "GENESIFT_SEED is not an integer");
    use_seed = static_cast<std::uint64_t>(*v);
  }
  auto [ds, truth] = gen_synthetic(n, d, k, classes, noise, use_seed);
  write_csv(ds, out_path);
  const std::string mask_path = out_path + ".mask";
  write_mask_file(truth, mask_path);
  std::cout << out_path << '\n' << mask_path << '\n';
  return 0;
}

int cmd_select(const std::string& data_path, const std::string& algorithm, const CommonOpts& opts,
               std::string mask_out, const std::string& trace_path) {
  ResolvedConfig cfg = resolve(opts);
  cfg.pipeline.algorithm = parse_algorithm(algorithm);
  const Dataset ds = load_data(data_path, cfg);
  const Dataset normalized = minmax_normalize(ds);
  double elapsed = 0.0;
  const SearchResult result = select_features(normalized, cfg.pipeline, &elapsed);

  if (mask_out.empty()) mask_out = data_path + "." + algorithm + ".mask";
  write_mask_file(result.best_mask, mask_out);
  if (!trace_path.empty()) append_trace(result.history, trace_path);

  const int decimals = cfg.pipeline.report_decimals;
  std::cout << "reduced_attributes: " << result.best_mask.popcount() << '\n'
            << "best_fitness: " << fmt_double(result.best_fitness) << '\n'
            << "evaluations: " << result.evaluations << '\n'
            << "selection_time_s: " << fmt_fixed(elapsed, decimals) << '\n'
            << "mask_file: " << mask_out << '\n';
  return 0;
}

int cmd_run(const std::string& data_path, const std::string& algorithm, const CommonOpts& opts,
            const std::string& out_path) {
  ResolvedConfig cfg = resolve(opts);
  cfg.pipeline.algorithm = parse_algorithm(algorithm);
  const Dataset ds = load_data(data_path, cfg);
  const EvalReport report = run_pipeline(ds, cfg.pipeline);
  std::cout << report_table({report}, cfg.pipeline.report_decimals);
  if (!out_path.empty()) {
    const bool fresh = !std::filesystem::exists(out_path) || std::filesystem::file_size(out_path) == 0;
    std::ofstream out(out_path, std::ios::app);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + out_path);
    if (fresh) out << report_csv_header() << '\n';
    out << report_csv_row(report, cfg.pipeline.report_decimals) << '\n';
  }
  return 0;
}

int cmd_bench(const std::string& manifest_path, const std::string& algorithms, const CommonOpts& opts,
              const std::string& out_path) {
  ResolvedConfig cfg = resolve(opts);
  const auto manifest = parse_manifest(manifest_path);

  std::vector<PipelineConfig> cfgs;
  if (algorithms == "both" || algorithms == "firefly") {
    PipelineConfig c = cfg.pipeline;
    c.algorithm = SearchAlgorithm::Firefly;
    cfgs.push_back(c);
  }
  if (algorithms == "both" || algorithms == "elephant") {
    PipelineConfig c = cfg.pipeline;
    c.algorithm = SearchAlgorithm::Elephant;
    cfgs.push_back(c);
  }
  if (cfgs.empty())
    throw Error(ErrorKind::Usage, "--algorithm expects firefly, elephant or both, got '" + algorithms + "'");

  const auto reports = bench(manifest, cfgs, opts.jobs);
  const int decimals = cfg.pipeline.report_decimals;
  std::cout << report_table(reports, decimals);

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + out_path);
    out << report_csv_header() << '\n';
    for (const auto& report : reports) out << report_csv_row(report, decimals) << '\n';
  }

  bool any_failed = false;
  for (const auto& report : reports) {
    if (report.failed) {
      any_failed = true;
      std::cerr << report.dataset << " (" << report.algorithm << ") failed: " << report.error << '\n';
    }
  }
  return any_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gene/feature subset search with a deep softmax classifier"};
  app.require_subcommand(1);

  // gensynth
  auto* gensynth = app.add_subcommand("gensynth", "generate a synthetic dataset plus ground-truth mask");
  std::size_t g_n = 200, g_d = 100, g_k = 5;
  int g_classes = 2;
  double g_noise = 0.5;
  long long g_seed = 1;
  bool g_seed_given = false;
  std::string g_out;
  gensynth->add_option("--n", g_n, "samples")->check(CLI::PositiveNumber);
  gensynth->add_option("--d", g_d, "features")->check(CLI::PositiveNumber);
  gensynth->add_option("--k", g_k, "informative features");
  gensynth->add_option("--classes", g_classes, "class count")->check(CLI::Range(2, 1000));
  gensynth->add_option("--noise", g_noise, "informative-feature noise stddev");
  gensynth->add_option("--seed", g_seed, "generator seed")
      ->check(CLI::NonNegativeNumber)
      ->each([&g_seed_given](const std::string&) { g_seed_given = true; });
  gensynth->add_option("--out", g_out, "output CSV path")->required();

  // select
  auto* select = app.add_subcommand("select", "search for a feature subset only");
  std::string s_data, s_algorithm = "firefly", s_mask_out, s_trace;
  CommonOpts s_opts;
  select->add_option("--data", s_data, "dataset CSV (label column last)")->required();
  select->add_option("--algorithm", s_algorithm, "firefly|elephant");
  select->add_option("--mask-out", s_mask_out, "selected-index output file");
  select->add_option("--trace", s_trace, "append the iteration log to this CSV");
  add_common(select, s_opts);

  // run
  auto* run = app.add_subcommand("run", "select features, then train and score the classifier");
  std::string r_data, r_algorithm = "firefly", r_out;
  CommonOpts r_opts;
  run->add_option("--data", r_data, "dataset CSV (label column last)")->required();
  run->add_option("--algorithm", r_algorithm, "firefly|elephant");
  run->add_option("--out", r_out, "append the report row to this CSV");
  add_common(run, r_opts);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run every manifest dataset through the pipeline");
  std::string b_manifest, b_algorithms = "both", b_out;
  CommonOpts b_opts;
  bench_cmd->add_option("--manifest", b_manifest, "file of 'name = path' lines")->required();
  bench_cmd->add_option("--algorithm", b_algorithms, "firefly|elephant|both");
  bench_cmd->add_option("--out", b_out, "write the report CSV here");
  add_common(bench_cmd, b_opts);

  try {
    app.parse(argc, argv);
    if (gensynth->parsed())
      return cmd_gensynth(g_n, g_d, g_k, g_classes, g_noise, g_seed, g_seed_given, g_out);
    if (select->parsed()) return cmd_select(s_data, s_algorithm, s_opts, s_mask_out, s_trace);
    if (run->parsed()) return cmd_run(r_data, r_algorithm, r_opts, r_out);
    if (bench_cmd->parsed()) return cmd_bench(b_manifest, b_algorithms, b_opts, b_out);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const genesift::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
