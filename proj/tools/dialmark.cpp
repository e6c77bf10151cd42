// Command-line front end: grid runs, report generation, domain generation.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dialmark/bench.hpp"
#include "dialmark/ontology.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Config keys mirror the flags; scalars are accepted where lists would do.
template <typename T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

struct RunArgs {
  std::string config;
  std::vector<int> envs;
  std::vector<std::string> domains;
  std::vector<std::string> algos;
  std::vector<std::string> modes;
  int seeds = 10;
  int train = 4000;
  int test = 500;
  std::string out = "results.csv";
  int jobs = 0;
};

bool is_learner(const std::string& algo) { return algo == "dqn" || algo == "gp"; }

int cmd_run(const RunArgs& args_in, const CLI::App& cmd) {
  RunArgs args = args_in;
  if (!args.config.empty()) {
    json cfg = json::parse(read_file(args.config));
    // Flags given on the command line win over the config file.
    if (cfg.contains("env") && !cmd.count("--env")) args.envs = as_list<int>(cfg["env"]);
    if (cfg.contains("domain") && !cmd.count("--domain"))
      args.domains = as_list<std::string>(cfg["domain"]);
    if (cfg.contains("algo") && !cmd.count("--algo"))
      args.algos = as_list<std::string>(cfg["algo"]);
    if (cfg.contains("mode") && !cmd.count("--mode"))
      args.modes = as_list<std::string>(cfg["mode"]);
    if (cfg.contains("seeds") && !cmd.count("--seeds")) args.seeds = cfg["seeds"].get<int>();
    if (cfg.contains("train") && !cmd.count("--train")) args.train = cfg["train"].get<int>();
    if (cfg.contains("test") && !cmd.count("--test")) args.test = cfg["test"].get<int>();
    if (cfg.contains("out") && !cmd.count("--out")) args.out = cfg["out"].get<std::string>();
    if (cfg.contains("jobs") && !cmd.count("--jobs")) args.jobs = cfg["jobs"].get<int>();
  }
  if (args.envs.empty()) args.envs = {1, 2, 3, 4, 5, 6};
  if (args.domains.empty()) args.domains = dialmark::benchmark_domain_names();
  if (args.algos.empty()) args.algos = {"rq", "emdb", "emdm", "hdc", "dqn", "gp"};
  if (args.modes.empty()) args.modes = {"v", "s", "bs"};
  if (args.jobs <= 0) args.jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (args.jobs <= 0) args.jobs = 1;

  dialmark::BenchOptions options;
  options.n_train = args.train;
  options.n_test = args.test;
  if (const char* off = std::getenv("DIALMARK_SEED_OFFSET"))
    options.seed_offset = std::strtoull(off, nullptr, 10);

  std::map<std::string, dialmark::ItemSet> domains;
  for (const std::string& name : args.domains)
    domains.emplace(name, dialmark::benchmark_domain(name));

  std::vector<dialmark::CellSpec> specs;
  for (int env : args.envs)
    for (const std::string& domain : args.domains)
      for (const std::string& algo : args.algos) {
        std::vector<std::string> modes = is_learner(algo) ? args.modes
                                                          : std::vector<std::string>{"-"};
        for (const std::string& mode : modes)
          for (int seed = 0; seed < args.seeds; ++seed)
            specs.push_back({env, domain, algo, mode, seed});
      }

  std::fprintf(stderr, "running %zu cells on %d jobs (train %d, test %d)\n", specs.size(),
               args.jobs, args.train, args.test);
  std::vector<dialmark::CellResult> results =
      dialmark::run_grid(domains, specs, options, args.jobs, args.out + ".partial");
  write_file(args.out, dialmark::results_to_csv(results));

  int failed = 0;
  for (const dialmark::CellResult& r : results)
    if (!r.error.empty()) {
      ++failed;
      std::fprintf(stderr, "FAILED %s seed=%d: %s\n", dialmark::cell_key(r.spec).c_str(),
                   r.spec.seed, r.error.c_str());
    }
  std::fprintf(stderr, "wrote %s (%zu cells, %d failed)\n", args.out.c_str(), results.size(),
               failed);
  return failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& in, const std::string& out_dir) {
  std::vector<dialmark::CellResult> results = dialmark::results_from_csv(read_file(in));
  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / "aggregate.csv").string(),
             dialmark::aggregate_to_csv(results));
  std::vector<std::string> plots = dialmark::emit_plots(results, out_dir);
  std::fprintf(stderr, "wrote aggregate.csv and %zu plots to %s\n", plots.size(),
               out_dir.c_str());
  return 0;
}

dialmark::GroupVisibility visibility_from(const std::string& s) {
  if (s == "group1_and_2") return dialmark::GroupVisibility::group1_and_2;
  if (s == "group2_only") return dialmark::GroupVisibility::group2_only;
  if (s == "inform_only") return dialmark::GroupVisibility::inform_only;
  throw std::runtime_error("unknown visibility '" + s + "'");
}

int cmd_gen_domain(const std::string& spec_path, const std::string& out_path) {
  json js = json::parse(read_file(spec_path));
  dialmark::DomainSpec spec;
  spec.name = js.at("name").get<std::string>();
  spec.n_items = js.at("n_items").get<int>();
  spec.n_families = js.value("n_families", 0);
  spec.seed = js.value("seed", std::uint64_t{0});
  for (const json& s : js.at("slots")) {
    dialmark::SlotSpec slot;
    slot.name = s.at("name").get<std::string>();
    slot.n_values = s.at("n_values").get<int>();
    slot.visibility = visibility_from(s.value("visibility", std::string("inform_only")));
    slot.constrainable = s.value("constrainable", false);
    slot.family_aligned = s.value("family_aligned", false);
    slot.skew_major_items = s.value("skew_major_items", 0);
    spec.slots.push_back(slot);
  }
  dialmark::ItemSet domain = dialmark::generate_synthetic_domain(spec);
  dialmark::save_itemset_json(domain, out_path);
  std::fprintf(stderr, "wrote %s (%zu items, %zu slots)\n", out_path.c_str(),
               domain.items.size(), domain.slots.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dialogue management benchmark"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "train/test a grid of benchmark cells");
  run->add_option("--config", run_args.config, "JSON config with the same keys as the flags");
  run->add_option("--env", run_args.envs, "environment ids (default all six)")
      ->check(CLI::Range(1, 6));
  run->add_option("--domain", run_args.domains, "domain names (default all shipped)");
  run->add_option("--algo", run_args.algos, "algorithms: rq emdb emdm hdc dqn gp");
  run->add_option("--mode", run_args.modes, "learner modes: v s bs")
      ->check(CLI::IsMember({"v", "s", "bs"}));
  run->add_option("--seeds", run_args.seeds, "number of seeds, 0..K-1");
  run->add_option("--train", run_args.train, "training episodes per cell");
  run->add_option("--test", run_args.test, "test episodes per cell");
  run->add_option("--out", run_args.out, "output CSV path");
  run->add_option("--jobs", run_args.jobs, "worker threads (default: hardware)");

  std::string report_in, report_dir = "plots";
  CLI::App* report = app.add_subcommand("report", "aggregate a results CSV and plot it");
  report->add_option("--in", report_in, "results CSV from 'run'")->required();
  report->add_option("--out-dir", report_dir, "directory for aggregate.csv and SVG plots");

  std::string gen_spec, gen_out;
  CLI::App* gen = app.add_subcommand("gen-domain", "generate a synthetic domain from a spec");
  gen->add_option("--spec", gen_spec, "domain spec JSON")->required();
  gen->add_option("--out", gen_out, "output domain JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args, *run);
    if (report->parsed()) return cmd_report(report_in, report_dir);
    if (gen->parsed()) return cmd_gen_domain(gen_spec, gen_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
