#include "dialmark/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dialmark/baselines.hpp"
#include "dialmark/gp.hpp"
#include "dialmark/personalization.hpp"
#include "dialmark/rl.hpp"

namespace dialmark {

namespace {

std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

constexpr const char* kCsvHeader =
    "env_id,domain,algorithm,mode,seed,train_episodes,test_episodes,"
    "test_reward_mean,test_success_rate,wall_clock_s";

std::string csv_row(const CellResult& r) {
  std::ostringstream out;
  out << r.spec.env_id << ',' << r.spec.domain << ',' << r.spec.algo << ',' << r.spec.mode << ','
      << r.spec.seed << ',' << r.train_episodes << ',' << r.test_episodes << ','
      << fmt(r.test_reward_mean, 6) << ',' << fmt(r.test_success_rate, 4) << ','
      << fmt(r.wall_clock_s, 3);
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string cell_label(const CellSpec& spec) {
  if (spec.mode.empty() || spec.mode == "-") return spec.algo;
  return spec.algo + "_" + spec.mode;
}

std::string cell_key(const CellSpec& spec) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d|%s|%s|%04d", spec.env_id, spec.domain.c_str(),
                cell_label(spec).c_str(), spec.seed);
  return buf;
}

PolicyHandle make_policy(const ItemSet& domain, const std::string& algo, const std::string& mode,
                         int n_train, RandomStream init_rng) {
  const bool baseline = algo == "rq" || algo == "emdb" || algo == "emdm" || algo == "hdc";
  if (baseline && !(mode.empty() || mode == "-"))
    throw std::invalid_argument("algorithm '" + algo + "' takes no personalization mode");

  PolicyHandle handle;
  if (algo == "rq") {
    handle.policy = std::make_unique<RandomQuestionPolicy>(domain);
  } else if (algo == "emdb") {
    handle.policy = std::make_unique<MaxEntropyQuestionPolicy>(domain);
  } else if (algo == "emdm") {
    auto policy = std::make_unique<MemoryMatchPolicy>(domain);
    MemoryMatchPolicy* raw = policy.get();
    handle.policy = std::move(policy);
    handle.trainable = true;
    handle.freeze = [raw] { raw->set_training(false); };
  } else if (algo == "hdc") {
    handle.policy = std::make_unique<HandcraftedPolicy>(domain);
  } else if (algo == "dqn" || algo == "gp") {
    if (!(mode == "v" || mode == "s" || mode == "bs"))
      throw std::invalid_argument("algorithm '" + algo +
                                  "' needs personalization mode v, s, or bs");
    // Exploration anneals over the dialogues a learner will actually see:
    // the whole run for a single policy, half of it per segment.
    auto build = [&](bool grouped, int horizon,
                     RandomStream rng) -> std::unique_ptr<TrainablePolicy> {
      if (algo == "dqn") {
        DqnConfig cfg;
        cfg.eps.horizon = std::max(1, horizon);
        return std::make_unique<DqnPolicy>(domain, cfg, grouped, rng);
      }
      return std::make_unique<GpPolicy>(domain, GpConfig{}, grouped);
    };
    std::unique_ptr<TrainablePolicy> policy;
    if (mode == "s")
      policy = std::make_unique<SegmentedPolicy>(
          build(false, n_train / 2, init_rng.substream("segment", 0)),
          build(false, n_train / 2, init_rng.substream("segment", 1)));
    else
      policy = build(mode == "bs", n_train, init_rng.substream("single"));
    TrainablePolicy* raw = policy.get();
    handle.policy = std::move(policy);
    handle.trainable = true;
    handle.freeze = [raw] { raw->set_training(false); };
  } else {
    throw std::invalid_argument("unknown algorithm '" + algo + "'");
  }
  return handle;
}

std::vector<std::string> benchmark_domain_names() { return {"fin", "cr", "sfr", "lap"}; }

ItemSet benchmark_domain(const std::string& name) {
  DomainSpec spec;
  if (name == "fin")
    spec = fin_spec();
  else if (name == "cr")
    spec = cr_spec();
  else if (name == "sfr")
    spec = sfr_spec();
  else if (name == "lap")
    spec = lap_spec();
  else
    throw std::invalid_argument("unknown domain '" + name + "'");
#ifdef DIALMARK_DATA_DIR
  std::filesystem::path file = std::filesystem::path(DIALMARK_DATA_DIR) / (name + ".json");
  if (std::filesystem::exists(file)) return load_itemset_json(file.string());
#endif
  return generate_synthetic_domain(spec);
}

CellResult run_cell(const ItemSet& domain, const CellSpec& spec, const BenchOptions& options) {
  CellResult result;
  result.spec = spec;

  auto t0 = std::chrono::steady_clock::now();

  // Every stream in the cell hangs off one root key so cells never share
  // randomness regardless of scheduling.
  std::uint64_t key = RandomStream::fnv1a(0, spec.domain);
  key = RandomStream::fnv1a(key, cell_label(spec));
  key = RandomStream::fnv1a(key, static_cast<std::uint64_t>(spec.env_id));
  key = RandomStream::fnv1a(key,
                            static_cast<std::uint64_t>(spec.seed) + options.seed_offset);
  RandomStream root(key);

  PolicyHandle handle = make_policy(domain, spec.algo, spec.mode, options.n_train,
                                    root.substream("init"));

  DialogEngine engine(domain, benchmark_env(spec.env_id));
  if (handle.trainable) {
    for (int i = 0; i < options.n_train; ++i) {
      RandomStream ep = root.substream("train", static_cast<std::uint64_t>(i));
      EpisodeRecord rec = engine.run_episode(*handle.policy, ep);
      if (options.keep_train_rewards) result.train_rewards.push_back(rec.ret);
    }
    result.train_episodes = options.n_train;
    if (handle.freeze) handle.freeze();
  }

  double reward_sum = 0.0;
  int successes = 0;
  for (int i = 0; i < options.n_test; ++i) {
    RandomStream ep = root.substream("test", static_cast<std::uint64_t>(i));
    EpisodeRecord rec = engine.run_episode(*handle.policy, ep);
    reward_sum += rec.ret;
    successes += rec.success ? 1 : 0;
  }
  result.test_episodes = options.n_test;
  result.test_reward_mean = options.n_test > 0 ? reward_sum / options.n_test : 0.0;
  result.test_success_rate = options.n_test > 0 ? static_cast<double>(successes) / options.n_test : 0.0;
  result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<CellResult> run_grid(const std::map<std::string, ItemSet>& domains,
                                 const std::vector<CellSpec>& specs, const BenchOptions& options,
                                 int jobs, const std::string& partial_csv_path) {
  std::vector<CellResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;

  if (!partial_csv_path.empty()) {
    std::ofstream out(partial_csv_path, std::ios::trunc);
    out << kCsvHeader << '\n';
  }

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      CellResult result;
      result.spec = specs[i];
      try {
        auto it = domains.find(specs[i].domain);
        if (it == domains.end())
          throw std::invalid_argument("unknown domain '" + specs[i].domain + "'");
        result = run_cell(it->second, specs[i], options);
      } catch (const std::exception& e) {
        result.error = e.what();
      }
      std::lock_guard<std::mutex> lock(sink_mutex);
      if (result.error.empty()) {
        if (!partial_csv_path.empty()) {
          std::ofstream out(partial_csv_path, std::ios::app);
          out << csv_row(result) << '\n';
        }
      } else {
        std::cerr << "cell " << cell_key(result.spec) << " failed: " << result.error << '\n';
      }
      results[i] = std::move(result);
    }
  };

  int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::sort(results.begin(), results.end(), [](const CellResult& a, const CellResult& b) {
    return cell_key(a.spec) < cell_key(b.spec);
  });
  return results;
}

std::string results_to_csv(const std::vector<CellResult>& results) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const CellResult& r : results) {
    if (!r.error.empty()) continue;
    out << csv_row(r) << '\n';
  }
  return out.str();
}

std::vector<CellResult> results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("results CSV: missing or unexpected header");
  std::vector<CellResult> results;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 10)
      throw std::runtime_error("results CSV line " + std::to_string(line_no) +
                               ": expected 10 fields, got " + std::to_string(f.size()));
    CellResult r;
    try {
      r.spec.env_id = std::stoi(f[0]);
      r.spec.domain = f[1];
      r.spec.algo = f[2];
      r.spec.mode = f[3];
      r.spec.seed = std::stoi(f[4]);
      r.train_episodes = std::stoi(f[5]);
      r.test_episodes = std::stoi(f[6]);
      r.test_reward_mean = std::stod(f[7]);
      r.test_success_rate = std::stod(f[8]);
      r.wall_clock_s = std::stod(f[9]);
    } catch (const std::exception&) {
      throw std::runtime_error("results CSV line " + std::to_string(line_no) + ": bad field value");
    }
    results.push_back(std::move(r));
  }
  return results;
}

namespace {

GroupStat stat_of(const std::vector<double>& xs) {
  GroupStat s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

std::map<std::string, std::vector<double>> group_rewards(
    const std::vector<CellResult>& results,
    const std::function<std::string(const CellResult&)>& key_of) {
  std::map<std::string, std::vector<double>> groups;
  for (const CellResult& r : results) {
    if (!r.error.empty()) continue;
    groups[key_of(r)].push_back(r.test_reward_mean);
  }
  return groups;
}

}  // namespace

std::map<std::string, GroupStat> aggregate_cells(const std::vector<CellResult>& results) {
  auto groups = group_rewards(results, [](const CellResult& r) {
    return std::to_string(r.spec.env_id) + "|" + r.spec.domain + "|" + cell_label(r.spec);
  });
  std::map<std::string, GroupStat> stats;
  for (auto& [key, xs] : groups) stats[key] = stat_of(xs);
  return stats;
}

std::map<std::string, GroupStat> aggregate_grand(const std::vector<CellResult>& results) {
  auto groups = group_rewards(results, [](const CellResult& r) { return cell_label(r.spec); });
  std::map<std::string, GroupStat> stats;
  for (auto& [key, xs] : groups) stats[key] = stat_of(xs);
  return stats;
}

std::string aggregate_to_csv(const std::vector<CellResult>& results) {
  std::ostringstream out;
  out << "scope,env_id,domain,policy,n,reward_mean,reward_sd,note\n";
  auto cells = aggregate_cells(results);
  if (cells.empty()) std::cerr << "aggregate: no completed cells, emitting header only\n";
  for (auto& [key, s] : cells) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '|', ',');
    out << "cell," << k << ',' << s.n << ',' << fmt(s.mean, 6) << ',' << fmt(s.sd, 6) << ','
        << (s.n == 1 ? "single-seed" : "") << '\n';
  }
  for (auto& [label, s] : aggregate_grand(results)) {
    out << "grand,,," << label << ',' << s.n << ',' << fmt(s.mean, 6) << ',' << fmt(s.sd, 6) << ','
        << (s.n == 1 ? "single-seed" : "") << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// SVG bar charts. Hand-emitted so report output has no rendering dependencies
// and is byte-deterministic.

namespace {

const std::vector<std::string> kPalette = {
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860",
    "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd", "#2f4b7c", "#a05195",
};

struct ChartSeries {
  // values[domain_index] may be NaN when the (domain, label) pair has no data.
  std::string label;
  std::vector<double> values;
};

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& domains,
                          const std::vector<ChartSeries>& series,
                          const std::map<std::string, int>& color_of) {
  double lo = 0.0, hi = 20.0;
  for (const ChartSeries& s : series)
    for (double v : s.values)
      if (!std::isnan(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  lo = std::floor(lo / 5.0) * 5.0;
  hi = std::ceil(hi / 5.0) * 5.0;

  const double bar_w = 14.0, bar_gap = 2.0, group_gap = 26.0;
  const double left = 52.0, top = 42.0, bottom = 34.0, plot_h = 260.0;
  const double group_w = series.size() * (bar_w + bar_gap) + group_gap;
  const double width = left + domains.size() * group_w + 16.0;
  const double height = top + plot_h + bottom;
  auto sy = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0) << "\" height=\""
      << fmt(height, 0) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << fmt(left, 0) << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";

  for (double tick = lo; tick <= hi + 1e-9; tick += 5.0) {
    double y = sy(tick);
    svg << "<line x1=\"" << fmt(left, 1) << "\" y1=\"" << fmt(y, 1) << "\" x2=\""
        << fmt(width - 12.0, 1) << "\" y2=\"" << fmt(y, 1) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fmt(left - 6.0, 1) << "\" y=\"" << fmt(y + 4.0, 1)
        << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(tick, 0) << "</text>\n";
  }
  svg << "<line x1=\"" << fmt(left, 1) << "\" y1=\"" << fmt(sy(0.0), 1) << "\" x2=\""
      << fmt(width - 12.0, 1) << "\" y2=\"" << fmt(sy(0.0), 1) << "\" stroke=\"#444444\"/>\n";

  for (std::size_t d = 0; d < domains.size(); ++d) {
    double gx = left + d * group_w + group_gap / 2.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      double v = series[s].values[d];
      if (std::isnan(v)) continue;
      double x = gx + s * (bar_w + bar_gap);
      double y0 = sy(std::max(0.0, v)), y1 = sy(std::min(0.0, v));
      const std::string& color = kPalette[color_of.at(series[s].label) % kPalette.size()];
      svg << "<rect x=\"" << fmt(x, 1) << "\" y=\"" << fmt(y0, 1) << "\" width=\"" << fmt(bar_w, 1)
          << "\" height=\"" << fmt(std::max(0.5, y1 - y0), 1) << "\" fill=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << fmt(gx + series.size() * (bar_w + bar_gap) / 2.0, 1) << "\" y=\""
        << fmt(top + plot_h + 18.0, 1) << "\" font-size=\"11\" text-anchor=\"middle\">"
        << domains[d] << "</text>\n";
  }

  double lx = left + 180.0;
  for (const ChartSeries& s : series) {
    const std::string& color = kPalette[color_of.at(s.label) % kPalette.size()];
    svg << "<rect x=\"" << fmt(lx, 1) << "\" y=\"10\" width=\"10\" height=\"10\" fill=\"" << color
        << "\"/>\n";
    svg << "<text x=\"" << fmt(lx + 13.0, 1) << "\" y=\"19\" font-size=\"10\">" << s.label
        << "</text>\n";
    lx += 13.0 + 7.0 * s.label.size() + 14.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<CellResult>& results,
                                    const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto cells = aggregate_cells(results);

  std::vector<int> envs;
  std::vector<std::string> domains, labels;
  for (const CellResult& r : results) {
    if (!r.error.empty()) continue;
    if (std::find(envs.begin(), envs.end(), r.spec.env_id) == envs.end())
      envs.push_back(r.spec.env_id);
    if (std::find(domains.begin(), domains.end(), r.spec.domain) == domains.end())
      domains.push_back(r.spec.domain);
    std::string label = cell_label(r.spec);
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
  }
  std::sort(envs.begin(), envs.end());
  std::sort(domains.begin(), domains.end());
  std::sort(labels.begin(), labels.end());
  std::map<std::string, int> color_of;
  for (std::size_t i = 0; i < labels.size(); ++i) color_of[labels[i]] = static_cast<int>(i);

  auto mean_of = [&](int env, const std::string& domain, const std::string& label) {
    auto it = cells.find(std::to_string(env) + "|" + domain + "|" + label);
    return it == cells.end() ? std::nan("") : it->second.mean;
  };

  std::vector<std::string> files;
  for (int env : envs) {
    std::vector<ChartSeries> series;
    for (const std::string& label : labels) {
      ChartSeries s{label, {}};
      for (const std::string& domain : domains) s.values.push_back(mean_of(env, domain, label));
      series.push_back(std::move(s));
    }
    std::string name = "env" + std::to_string(env) + ".svg";
    std::ofstream out(std::filesystem::path(out_dir) / name);
    out << bar_chart_svg("env " + std::to_string(env) + " mean test return", domains, series,
                         color_of);
    files.push_back(name);
  }

  // Cross-environment average: mean over the per-env cell means, so every
  // environment weighs equally even if seed counts differ.
  std::vector<ChartSeries> series;
  for (const std::string& label : labels) {
    ChartSeries s{label, {}};
    for (const std::string& domain : domains) {
      double sum = 0.0;
      int n = 0;
      for (int env : envs) {
        double v = mean_of(env, domain, label);
        if (!std::isnan(v)) {
          sum += v;
          ++n;
        }
      }
      s.values.push_back(n > 0 ? sum / n : std::nan(""));
    }
    series.push_back(std::move(s));
  }
  std::string name = "all_envs.svg";
  std::ofstream out(std::filesystem::path(out_dir) / name);
  out << bar_chart_svg("mean test return across environments", domains, series, color_of);
  files.push_back(name);
  return files;
}

}  // namespace dialmark
