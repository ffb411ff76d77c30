#include "softpg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace softpg::harness {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (env.kind == "verify") return;
  if (instances < 1 || repeats < 1)
    throw std::invalid_argument("experiment: instances and repeats must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms configured");
  if (env.kind == "bandit") {
    if (env.arms < 2) throw std::invalid_argument("experiment: bandit needs arms >= 2");
    if (!(env.gap > 0.0 && env.gap < 1.0))
      throw std::invalid_argument("experiment: bandit gap must be in (0,1)");
  } else if (env.kind == "mdp") {
    if (static_cast<int>(env.mdp_names.size()) != instances)
      throw std::invalid_argument("experiment: mdp name list must have one entry per instance");
    for (const auto& n : env.mdp_names) {
      if (n == "cliff_world" || n == "deep_sea" || n == "flat_grad") continue;
      if (!fs::exists(n)) throw std::invalid_argument("experiment: mdp file not found: " + n);
    }
  } else {
    throw std::invalid_argument("experiment: unknown environment kind " + env.kind);
  }
  for (const auto& alg : algorithms) {
    const bool is_bandit = env.kind == "bandit";
    alg.config.validate_for(is_bandit, is_bandit ? env.arms : 0);
  }
}

uint64_t run_seed(uint64_t base_seed, int instance, int repeat, int algorithm) {
  return base_seed + static_cast<uint64_t>(instance) * 1000000ull +
         static_cast<uint64_t>(repeat) * 1000ull + static_cast<uint64_t>(algorithm);
}

uint64_t instance_seed(uint64_t base_seed, int instance) {
  return base_seed + static_cast<uint64_t>(instance) * 1000000ull + 999000ull;
}

// ------------------------------------------------------------------ config text

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: invalid boolean value " + v);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void apply_algorithm_key(opt::OptimizerConfig* cfg, const std::string& key,
                         const std::string& val) {
  if (key == "tag") cfg->algorithm = opt::algorithm_from_string(val);
  else if (key == "iters") cfg->iters = std::stoll(val);
  else if (key == "eta") cfg->eta = std::stod(val);
  else if (key == "tau") cfg->tau = std::stod(val);
  else if (key == "h") cfg->ls_h = std::stod(val);
  else if (key == "epsilon") cfg->ls_epsilon = std::stod(val);
  else if (key == "C") cfg->ls_C = std::stod(val);
  else if (key == "eta_max") cfg->ls_eta_max = std::stod(val);
  else if (key == "backtrack") cfg->ls_backtrack = std::stod(val);
  else if (key == "max_backtracks") cfg->ls_max_backtracks = std::stoi(val);
  else if (key == "adaptive_eta_max") cfg->ls_adaptive_eta_max = parse_bool(val);
  else if (key == "c_infinity") cfg->c_infinity = std::stod(val);
  else if (key == "eta0") cfg->eta0 = std::stod(val);
  else if (key == "beta") cfg->beta = std::stod(val);
  else if (key == "sgc_mode") cfg->sgc_mode = parse_bool(val);
  else if (key == "doubling_T0") cfg->doubling_T0 = std::stoll(val);
  else if (key == "tau0") cfg->tau0 = std::stod(val);
  else if (key == "p") cfg->p = std::stod(val);
  else if (key == "B1") cfg->B1 = std::stod(val);
  else if (key == "B4") cfg->B4 = std::stod(val);
  else if (key == "n_stages") cfg->n_stages = std::stoi(val);
  else if (key == "ms_doubling") cfg->ms_doubling = parse_bool(val);
  else if (key == "ms_T1") cfg->ms_T1 = std::stoll(val);
  else if (key == "init") cfg->init = val == "bad" ? opt::InitKind::Bad : opt::InitKind::Uniform;
  else if (key == "bad_logit") cfg->bad_logit = std::stod(val);
  else if (key == "record_cap") cfg->record_cap = std::stoll(val);
  else throw std::invalid_argument("config: unknown algorithm key " + key);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.algorithms.clear();
  std::istringstream is(text);
  std::string line, section;
  std::vector<std::pair<std::string, std::string>> pending_alg;
  std::vector<std::vector<std::pair<std::string, std::string>>> alg_blocks;
  const auto flush_alg = [&] {
    if (!pending_alg.empty()) alg_blocks.push_back(pending_alg);
    pending_alg.clear();
  };
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      if (section == "algorithm") flush_alg();
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section == "experiment") {
      if (key == "name") cfg.name = val;
      else if (key == "iters") cfg.iters = std::stoll(val);
      else if (key == "instances") cfg.instances = std::stoi(val);
      else if (key == "repeats") cfg.repeats = std::stoi(val);
      else if (key == "base_seed") cfg.base_seed = std::stoull(val);
      else if (key == "workers") cfg.workers = std::stoi(val);
      else if (key == "out") cfg.out_dir = val;
      else throw std::invalid_argument("config: unknown experiment key " + key);
    } else if (section == "environment") {
      if (key == "kind") cfg.env.kind = val;
      else if (key == "arms") cfg.env.arms = std::stoi(val);
      else if (key == "gap") cfg.env.gap = std::stod(val);
      else if (key == "family") cfg.env.family = bandit::family_from_string(val);
      else if (key == "gaussian_std") cfg.env.gaussian_std = std::stod(val);
      else if (key == "beta_concentration") cfg.env.beta_concentration = std::stod(val);
      else if (key == "names") {
        cfg.env.mdp_names.clear();
        std::istringstream ns(val);
        std::string item;
        while (std::getline(ns, item, ',')) {
          item = trim(item);
          if (!item.empty()) cfg.env.mdp_names.push_back(item);
        }
      } else {
        throw std::invalid_argument("config: unknown environment key " + key);
      }
    } else if (section == "algorithm") {
      pending_alg.emplace_back(key, val);
    } else {
      throw std::invalid_argument("config: key outside any section: " + line);
    }
  }
  flush_alg();
  for (const auto& block : alg_blocks) {
    AlgorithmEntry entry;
    entry.config.iters = cfg.iters;
    for (const auto& [k, v] : block) apply_algorithm_key(&entry.config, k, v);
    cfg.algorithms.push_back(entry);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "name = " << cfg.name << "\n";
  os << "iters = " << cfg.iters << "\n";
  os << "instances = " << cfg.instances << "\n";
  os << "repeats = " << cfg.repeats << "\n";
  os << "base_seed = " << cfg.base_seed << "\n";
  os << "workers = " << cfg.workers << "\n";
  os << "out = " << cfg.out_dir << "\n\n";
  os << "[environment]\n";
  os << "kind = " << cfg.env.kind << "\n";
  if (cfg.env.kind == "bandit") {
    os << "arms = " << cfg.env.arms << "\n";
    os << "gap = " << format_double(cfg.env.gap) << "\n";
    os << "family = " << bandit::family_to_string(cfg.env.family) << "\n";
    os << "gaussian_std = " << format_double(cfg.env.gaussian_std) << "\n";
    os << "beta_concentration = " << format_double(cfg.env.beta_concentration) << "\n";
  } else if (cfg.env.kind == "mdp") {
    os << "names = ";
    for (size_t i = 0; i < cfg.env.mdp_names.size(); ++i)
      os << (i ? ", " : "") << cfg.env.mdp_names[i];
    os << "\n";
  }
  for (const auto& alg : cfg.algorithms) {
    const auto& c = alg.config;
    os << "\n[algorithm]\n";
    os << "tag = " << opt::algorithm_to_string(c.algorithm) << "\n";
    os << "iters = " << c.iters << "\n";
    if (c.eta > 0.0) os << "eta = " << format_double(c.eta) << "\n";
    if (c.tau > 0.0) os << "tau = " << format_double(c.tau) << "\n";
    os << "h = " << format_double(c.ls_h) << "\n";
    os << "epsilon = " << format_double(c.ls_epsilon) << "\n";
    os << "C = " << format_double(c.ls_C) << "\n";
    if (c.ls_eta_max > 0.0) os << "eta_max = " << format_double(c.ls_eta_max) << "\n";
    os << "backtrack = " << format_double(c.ls_backtrack) << "\n";
    os << "max_backtracks = " << c.ls_max_backtracks << "\n";
    os << "adaptive_eta_max = " << (c.ls_adaptive_eta_max ? "true" : "false") << "\n";
    if (c.c_infinity > 0.0) os << "c_infinity = " << format_double(c.c_infinity) << "\n";
    if (c.eta0 > 0.0) os << "eta0 = " << format_double(c.eta0) << "\n";
    os << "beta = " << format_double(c.beta) << "\n";
    os << "sgc_mode = " << (c.sgc_mode ? "true" : "false") << "\n";
    os << "doubling_T0 = " << c.doubling_T0 << "\n";
    os << "tau0 = " << format_double(c.tau0) << "\n";
    os << "p = " << format_double(c.p) << "\n";
    os << "B1 = " << format_double(c.B1) << "\n";
    if (c.B4 > 0.0) os << "B4 = " << format_double(c.B4) << "\n";
    os << "n_stages = " << c.n_stages << "\n";
    os << "ms_doubling = " << (c.ms_doubling ? "true" : "false") << "\n";
    os << "ms_T1 = " << c.ms_T1 << "\n";
    os << "init = " << (c.init == opt::InitKind::Bad ? "bad" : "uniform") << "\n";
    os << "bad_logit = " << format_double(c.bad_logit) << "\n";
    os << "record_cap = " << c.record_cap << "\n";
  }
  return os.str();
}

// ------------------------------------------------------------------ presets

namespace {

opt::OptimizerConfig base_alg(opt::Algorithm a, int64_t iters) {
  opt::OptimizerConfig c;
  c.algorithm = a;
  c.iters = iters;
  return c;
}

ExperimentConfig preset_fig1() {
  ExperimentConfig cfg;
  cfg.name = "fig1-exact-mdps";
  cfg.env.kind = "mdp";
  cfg.env.mdp_names = {"cliff_world", "deep_sea", "flat_grad"};
  cfg.instances = 3;
  cfg.repeats = 1;
  cfg.iters = 10000;
  cfg.out_dir = "out/fig1-exact-mdps";
  for (auto a : {opt::Algorithm::PG, opt::Algorithm::PG_LS, opt::Algorithm::PG_LOG_LS,
                 opt::Algorithm::GNPG, opt::Algorithm::PG_A}) {
    auto c = base_alg(a, cfg.iters);
    c.ls_h = 0.5;
    c.ls_epsilon = 1e-4;
    c.ls_C = 1.0;
    cfg.algorithms.push_back({c});
  }
  return cfg;
}

ExperimentConfig preset_fig2(const std::string& difficulty, const std::string& family) {
  ExperimentConfig cfg;
  cfg.name = "fig2-" + difficulty + "-" + family;
  cfg.env.kind = "bandit";
  cfg.env.arms = 10;
  cfg.env.gap = difficulty == "easy" ? 0.5 : 0.1;
  cfg.env.family = bandit::family_from_string(family);
  cfg.instances = 25;
  cfg.repeats = 5;
  cfg.iters = 100000;
  cfg.out_dir = "out/" + cfg.name;
  for (auto a : {opt::Algorithm::SPG_ESS, opt::Algorithm::SPG_ESS_D, opt::Algorithm::SPG_O_G,
                 opt::Algorithm::SPG_O_R}) {
    auto c = base_alg(a, cfg.iters);
    c.beta = 1.0;
    c.doubling_T0 = 5000;
    c.record_cap = 2000;
    cfg.algorithms.push_back({c});
  }
  return cfg;
}

ExperimentConfig preset_fig3() {
  ExperimentConfig cfg;
  cfg.name = "fig3-exact-entropy";
  cfg.env.kind = "bandit";
  cfg.env.arms = 10;
  cfg.env.gap = 0.05;
  cfg.instances = 50;
  cfg.repeats = 1;
  cfg.out_dir = "out/fig3-exact-entropy";

  auto ms = base_alg(opt::Algorithm::PG_E_MS, 0);
  ms.tau0 = 0.5;
  ms.p = 1.0;
  ms.B1 = 0.01;
  ms.n_stages = 4;
  ms.init = opt::InitKind::Bad;
  ms.bad_logit = 12.0;
  // Stage lengths depend only on (A, tau0, p, B1, B4); any instance with the
  // right arm count gives the shared iteration budget.
  bandit::BanditSpec probe;
  probe.means.assign(cfg.env.arms, 0.0);
  for (int a = 0; a < cfg.env.arms; ++a) probe.means[a] = (a + 1.0) / (cfg.env.arms + 1.0);
  const auto env = opt::make_bandit_env(probe, "probe");
  const int64_t total = opt::multistage_total_iterations(*env, ms);
  cfg.iters = total;
  ms.iters = total;

  auto pg = base_alg(opt::Algorithm::PG, total);
  pg.init = opt::InitKind::Bad;
  pg.bad_logit = 12.0;
  auto pge = base_alg(opt::Algorithm::PG_E, total);
  pge.tau = 0.1;
  pge.init = opt::InitKind::Bad;
  pge.bad_logit = 12.0;
  cfg.algorithms.push_back({pg});
  cfg.algorithms.push_back({pge});
  cfg.algorithms.push_back({ms});
  return cfg;
}

ExperimentConfig preset_entropy_stochastic(const std::string& name, opt::InitKind init) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.env.kind = "bandit";
  cfg.env.arms = 10;
  cfg.env.gap = 0.5;
  cfg.instances = 25;
  cfg.repeats = 5;
  cfg.iters = 100000;
  cfg.out_dir = "out/" + name;
  const auto add = [&](opt::OptimizerConfig c) {
    c.init = init;
    c.bad_logit = 9.0;
    c.record_cap = 2000;
    cfg.algorithms.push_back({c});
  };
  add(base_alg(opt::Algorithm::SPG_ESS, cfg.iters));
  add(base_alg(opt::Algorithm::SPG_ESS_D, cfg.iters));
  auto ess_e = base_alg(opt::Algorithm::SPG_E_ESS, cfg.iters);
  ess_e.tau = 0.1;
  add(ess_e);
  auto ms = base_alg(opt::Algorithm::SPG_E_MS, cfg.iters);
  ms.ms_doubling = true;
  ms.ms_T1 = 5000;
  ms.tau0 = 0.5;
  ms.B1 = 1.0;
  ms.beta = 1.0;
  add(ms);
  add(base_alg(opt::Algorithm::SPG_O_G, cfg.iters));
  add(base_alg(opt::Algorithm::SPG_O_R, cfg.iters));
  return cfg;
}

ExperimentConfig preset_verify_all() {
  ExperimentConfig cfg;
  cfg.name = "verify-all";
  cfg.env.kind = "verify";
  cfg.out_dir = "out/verify-all";
  cfg.instances = 1;
  cfg.repeats = 1;
  return cfg;
}

}  // namespace

std::vector<std::string> list_presets() {
  return {"fig1-exact-mdps",     "fig2-easy-bernoulli", "fig2-easy-gaussian",
          "fig2-easy-beta",      "fig2-hard-bernoulli", "fig2-hard-gaussian",
          "fig2-hard-beta",      "fig3-exact-entropy",  "fig4-entropy-uniform",
          "fig5-entropy-bad",    "verify-all"};
}

bool is_preset(const std::string& name) {
  const auto all = list_presets();
  return std::find(all.begin(), all.end(), name) != all.end();
}

ExperimentConfig preset(const std::string& name) {
  if (name == "fig1-exact-mdps") return preset_fig1();
  if (name.rfind("fig2-", 0) == 0) {
    const auto rest = name.substr(5);
    const auto dash = rest.find('-');
    if (dash != std::string::npos) {
      const auto difficulty = rest.substr(0, dash);
      const auto family = rest.substr(dash + 1);
      if ((difficulty == "easy" || difficulty == "hard") &&
          (family == "bernoulli" || family == "gaussian" || family == "beta"))
        return preset_fig2(difficulty, family);
    }
  }
  if (name == "fig3-exact-entropy") return preset_fig3();
  if (name == "fig4-entropy-uniform")
    return preset_entropy_stochastic(name, opt::InitKind::Uniform);
  if (name == "fig5-entropy-bad") return preset_entropy_stochastic(name, opt::InitKind::Bad);
  if (name == "verify-all") return preset_verify_all();
  throw std::invalid_argument("unknown preset: " + name);
}

// ------------------------------------------------------------------ experiment

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string format_csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string run_id(const std::string& alg, int instance, int repeat) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_i%03d_r%02d", alg.c_str(), instance, repeat);
  return buf;
}

void write_file(const std::string& path, const std::string& content,
                std::vector<std::pair<std::string, uint64_t>>* checksums) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path);
  if (checksums) checksums->emplace_back(fs::path(path).filename().string(), fnv1a64(content));
}

std::string trace_csv(const opt::RunTrace& trace, int instance, int repeat) {
  std::ostringstream os;
  os << "run_id,algorithm,instance,repeat,seed,iter,stage,tau,eta,f,subopt,grad_norm\n";
  const std::string id = run_id(trace.algorithm, instance, repeat);
  for (const auto& row : trace.rows) {
    os << id << ',' << trace.algorithm << ',' << instance << ',' << repeat << ',' << trace.seed
       << ',' << row.iter << ',' << row.stage << ',' << format_csv_double(row.tau) << ','
       << format_csv_double(row.eta) << ',' << format_csv_double(row.f) << ','
       << format_csv_double(row.subopt) << ',' << format_csv_double(row.grad_norm) << '\n';
  }
  return os.str();
}

struct Job {
  int instance;
  int repeat;
  int algorithm;
};

int run_verify_preset(const ExperimentConfig& cfg, ExperimentResult* result);

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.out_dir = cfg.out_dir;
  fs::create_directories(cfg.out_dir);

  if (cfg.env.kind == "verify") {
    result.flagged_runs = run_verify_preset(cfg, &result);
    return result;
  }

  // Instances and env facades are shared across repeats and algorithms.
  std::vector<std::unique_ptr<opt::Env>> envs;
  std::vector<std::string> instance_files;
  for (int i = 0; i < cfg.instances; ++i) {
    if (cfg.env.kind == "bandit") {
      auto spec = bandit::generate_instance(cfg.env.arms, cfg.env.gap, cfg.env.family,
                                            instance_seed(cfg.base_seed, i));
      spec.gaussian_std = cfg.env.gaussian_std;
      spec.beta_concentration = cfg.env.beta_concentration;
      instance_files.push_back(bandit::to_instance_file(spec));
      envs.push_back(opt::make_bandit_env(std::move(spec), "bandit" + std::to_string(i)));
    } else {
      const auto& name = cfg.env.mdp_names[i];
      auto spec = (name == "cliff_world" || name == "deep_sea" || name == "flat_grad")
                      ? mdp::make_named(name)
                      : mdp::load_instance(name);
      instance_files.push_back(mdp::to_instance_file(spec));
      envs.push_back(opt::make_mdp_env(std::move(spec), name));
    }
    envs.back()->optimal_value(0.0);  // warm the shared memo before dispatch
  }

  std::vector<Job> jobs;
  for (int i = 0; i < cfg.instances; ++i)
    for (int j = 0; j < cfg.repeats; ++j)
      for (int k = 0; k < static_cast<int>(cfg.algorithms.size()); ++k)
        jobs.push_back({i, j, k});

  std::vector<opt::RunTrace> traces(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;
  const int workers = std::max(1, cfg.workers);
  const auto worker = [&] {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= jobs.size() || failed.load()) return;
      const Job& job = jobs[idx];
      try {
        traces[idx] = opt::run(*envs[job.instance], cfg.algorithms[job.algorithm].config,
                               run_seed(cfg.base_seed, job.instance, job.repeat, job.algorithm));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failure_message = e.what();
        failed.store(true);
        return;
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("experiment run failed: " + failure_message);

  std::vector<std::pair<std::string, uint64_t>> checksums;
  std::vector<std::string> flagged;

  for (int i = 0; i < cfg.instances; ++i) {
    const std::string path =
        (fs::path(cfg.out_dir) / ("instance_" + std::to_string(i) + ".txt")).string();
    write_file(path, instance_files[i], &checksums);
    result.files.push_back(path);
  }

  for (size_t idx = 0; idx < jobs.size(); ++idx) {
    const Job& job = jobs[idx];
    const auto& trace = traces[idx];
    const std::string id = run_id(trace.algorithm, job.instance, job.repeat);
    const std::string path = (fs::path(cfg.out_dir) / ("trace_" + id + ".csv")).string();
    write_file(path, trace_csv(trace, job.instance, job.repeat), &checksums);
    result.files.push_back(path);
    ++result.total_runs;
    if (trace.status == opt::RunStatus::Diverged ||
        trace.status == opt::RunStatus::LineSearchFailure) {
      ++result.flagged_runs;
      flagged.push_back(id + " " + opt::run_status_to_string(trace.status));
    }
  }

  // One aggregate per algorithm: mean suboptimality and normal-approximation
  // 95% interval across unflagged runs, with early-stopped runs carried
  // forward at their final value.
  for (int k = 0; k < static_cast<int>(cfg.algorithms.size()); ++k) {
    std::vector<const opt::RunTrace*> runs;
    for (size_t idx = 0; idx < jobs.size(); ++idx)
      if (jobs[idx].algorithm == k && traces[idx].status != opt::RunStatus::Diverged &&
          traces[idx].status != opt::RunStatus::LineSearchFailure)
        runs.push_back(&traces[idx]);
    std::set<int64_t> grid;
    for (const auto* run : runs)
      for (const auto& row : run->rows) grid.insert(row.iter);
    std::ostringstream os;
    os << "algorithm,iter,mean_subopt,ci95,n\n";
    const std::string alg = opt::algorithm_to_string(cfg.algorithms[k].config.algorithm);
    std::vector<size_t> cursor(runs.size(), 0);
    for (const int64_t iter : grid) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (size_t r = 0; r < runs.size(); ++r) {
        const auto& rows = runs[r]->rows;
        while (cursor[r] + 1 < rows.size() && rows[cursor[r] + 1].iter <= iter) ++cursor[r];
        double v;
        if (rows[cursor[r]].iter == iter) v = rows[cursor[r]].subopt;
        else if (rows.back().iter < iter) v = rows.back().subopt;
        else continue;  // off-grid row of another run
        sum += v;
        sum2 += v * v;
        ++n;
      }
      if (n == 0) continue;
      const double mean = sum / n;
      const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
      const double ci = 1.96 * std::sqrt(var / n);
      os << alg << ',' << iter << ',' << format_csv_double(mean) << ','
         << format_csv_double(ci) << ',' << n << '\n';
    }
    const std::string path = (fs::path(cfg.out_dir) / ("agg_" + alg + ".csv")).string();
    write_file(path, os.str(), &checksums);
    result.files.push_back(path);
  }

  // Manifest: config echo, version, checksums. The timestamp is the one
  // intentionally nondeterministic byte range.
  std::ostringstream manifest;
  manifest << "# experiment manifest\n";
  manifest << "library_version = " << kVersion << "\n";
  manifest << "created_unix = " << std::time(nullptr) << "\n";
  manifest << "total_runs = " << result.total_runs << "\n";
  manifest << "flagged_runs = " << result.flagged_runs << "\n";
  for (const auto& f : flagged) manifest << "flagged: " << f << "\n";
  manifest << "\n[checksums]\n";
  for (const auto& [name, sum] : checksums) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sum));
    manifest << name << " = " << buf << "\n";
  }
  manifest << "\n[config]\n" << config_to_text(cfg);
  const std::string mpath = (fs::path(cfg.out_dir) / "manifest.txt").string();
  write_file(mpath, manifest.str(), nullptr);
  result.files.push_back(mpath);
  return result;
}

// ------------------------------------------------------------------ verify suite

VerifyConfig parse_verify_config(const std::string& text) {
  VerifyConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "bandit_instances") cfg.bandit_instances = std::stoi(val);
    else if (key == "trials") cfg.trials = std::stoi(val);
    else if (key == "mdp_trials") cfg.mdp_trials = std::stoi(val);
    else if (key == "samples") cfg.samples = std::stoll(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "out") cfg.out_dir = val;
    else throw std::invalid_argument("verify config: unknown key " + key);
  }
  return cfg;
}

VerifyConfig load_verify_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read verify config " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_verify_config(buf.str());
}

namespace {

// Merge same-named reports from several instances into one row.
void merge_report(std::map<std::string, verify::PropertyReport>* into,
                  const verify::PropertyReport& r) {
  auto it = into->find(r.name);
  if (it == into->end()) {
    (*into)[r.name] = r;
    return;
  }
  auto& acc = it->second;
  acc.trials += r.trials;
  acc.max_violation = std::max(acc.max_violation, r.max_violation);
  acc.tightness = std::max(acc.tightness, r.tightness);
  acc.pass = acc.pass && r.pass;
}

}  // namespace

int verify_suite(const VerifyConfig& cfg, std::vector<verify::PropertyReport>* reports_out) {
  std::map<std::string, verify::PropertyReport> reports;
  Rng rng(cfg.seed);

  // Scalar identities first.
  if (cfg.trials > 0) {
    double worst = 0.0;
    for (const double x : {0.0, 1e-6, 1.0 / std::exp(1.0), 1.0, std::exp(1.0), 10.0, 1e6}) {
      const double w = verify::lambert_w(x);
      worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, x));
    }
    merge_report(&reports, verify::PropertyReport::from("lambert_w_identity", 7, worst, 0.0, 1e-12));
  }
  if (cfg.trials > 0) {
    double worst = 0.0;
    const int n = std::min(cfg.trials, 10000);
    for (int i = 0; i < n; ++i) {
      const double r2 = rng.uniform(0.0, 0.8);
      const double r1 = r2 + rng.uniform(0.05, 1.0 - r2 > 0.05 ? 1.0 - r2 : 0.05);
      const double p = rng.uniform(0.05, 0.95);
      const auto id = verify::two_arm_sgc_equality(r1, r2, p);
      worst = std::max(worst, std::abs(id.lhs - id.rho * id.rhs));
    }
    merge_report(&reports,
                 verify::PropertyReport::from("two_arm_sgc_identity", n, worst, 0.0, 1e-12));
  }
  if (cfg.trials > 0) {
    // Bias bound: worst-case construction saturates it; random instances obey it.
    double worst = 0.0, tight = 0.0;
    int n = 0;
    for (const double tau : {0.05, 0.1, 0.2}) {
      const auto spec = verify::worst_case_bias_instance(10, tau);
      const double bound = verify::entropy_bias_bound(10, tau);
      const double bias = verify::measured_entropy_bias(spec, tau);
      worst = std::max(worst, std::abs(bias - bound));  // must be achieved, not just bounded
      ++n;
      for (int i = 0; i < 200; ++i) {
        auto rnd = bandit::generate_instance(10, 0.1 + 0.4 * rng.uniform(),
                                             bandit::RewardFamily::Bernoulli, rng.next_u64());
        const double b = verify::measured_entropy_bias(rnd, tau);
        worst = std::max(worst, b - bound);
        tight = std::max(tight, b / bound);
        ++n;
      }
    }
    merge_report(&reports, verify::PropertyReport::from("entropy_bias_bound", n, worst, tight, 1e-6));
  }

  // Random bandit instances.
  for (int i = 0; i < cfg.bandit_instances; ++i) {
    const int arms = i % 3 == 0 ? 2 : (i % 3 == 1 ? 5 : 10);
    const double gap = i % 2 == 0 ? 0.5 : 0.1;
    const auto spec =
        bandit::generate_instance(arms, gap, bandit::RewardFamily::Bernoulli, cfg.seed + 7000 + i);
    const int t = cfg.trials / std::max(1, cfg.bandit_instances);
    merge_report(&reports, verify::check_smoothness(spec, 0.0, bandit::smoothness(), t, rng));
    merge_report(&reports, verify::check_smoothness(
                               spec, 0.5, bandit::entropy_smoothness(0.5, arms), t, rng));
    merge_report(&reports, verify::check_lojasiewicz(spec, 0.0, t, rng));
    merge_report(&reports, verify::check_lojasiewicz(spec, 0.5, t, rng));
    merge_report(&reports, verify::check_reversed_lojasiewicz(spec, t, rng));
    merge_report(&reports, verify::check_sgc(spec, t, rng));
    merge_report(&reports, verify::check_unbiased(spec, std::min(t, 100), rng));
    merge_report(&reports, verify::check_entropy_assumptions(spec, t, rng));
    if (i == 0 && cfg.samples > 0) {
      merge_report(&reports, verify::check_gradient_bounds(spec, cfg.samples, rng));
      merge_report(&reports, verify::check_second_moment(spec, cfg.samples, rng));
    }
  }

  // Random small MDPs.
  for (int i = 0; i < (cfg.mdp_trials > 0 ? 5 : 0); ++i) {
    const auto spec = mdp::random_instance(3, 3, 0.9, cfg.seed + 9000 + i);
    const int t = std::max(1, cfg.mdp_trials / 5);
    merge_report(&reports, verify::check_smoothness(spec, 0.0, mdp::smoothness(0.9), t, rng));
    merge_report(&reports, verify::check_smoothness(
                               spec, 0.5, mdp::entropy_smoothness(0.9, 0.5, 3), t, rng));
    merge_report(&reports, verify::check_lojasiewicz(spec, 0.0, t, rng));
    merge_report(&reports, verify::check_lojasiewicz(spec, 0.5, t, rng));
    merge_report(&reports, verify::check_reversed_lojasiewicz(spec, t, rng));
    merge_report(&reports, verify::check_entropy_assumptions(spec, std::min(t, 100), rng));
    const auto small = mdp::random_instance(2, 2, 0.8, cfg.seed + 9500 + i);
    merge_report(&reports, verify::check_sgc(small, t, rng));
    merge_report(&reports, verify::check_unbiased(small, std::min(t, 100), rng));
    if (i == 0 && cfg.samples > 0)
      merge_report(&reports, verify::check_gradient_bounds(small, cfg.samples / 10, rng));
  }

  // Named environments. CliffWorld's rewards leave [0,1], so the checks whose
  // constants assume that range are skipped there.
  const std::vector<std::string> named =
      cfg.mdp_trials > 0 ? std::vector<std::string>{"cliff_world", "deep_sea", "flat_grad"}
                         : std::vector<std::string>{};
  for (const auto& name : named) {
    const auto spec = mdp::make_named(name);
    const int t = std::max(1, cfg.mdp_trials / 10);
    merge_report(&reports, verify::check_lojasiewicz(spec, 0.0, t, rng));
    {
      // Gradient vs central finite differences on a few random logits.
      double worst = 0.0;
      for (int i = 0; i < 3; ++i) {
        const Matrix theta = verify::random_theta(spec.S, spec.A, rng);
        const auto cache = mdp::evaluate(spec, theta, 0.0);
        const auto fd = verify::finite_diff_grad(
            [&](const Matrix& th) { return mdp::value_of(spec, th, 0.0); }, theta, 1e-5);
        const double scale = std::max(1.0, norm2(cache.grad));
        worst = std::max(worst, norm2(cache.grad - fd) / scale);
      }
      merge_report(&reports, verify::PropertyReport::from(std::string("mdp_grad_fd_") + name, 3,
                                                          worst, 0.0, 1e-5));
    }
    {
      // Discounted entropy of random policies stays below log(A)/(1-gamma).
      double worst = 0.0, tight = 0.0;
      const double bound = std::log(static_cast<double>(spec.A)) / (1.0 - spec.gamma);
      for (int i = 0; i < t; ++i) {
        const Matrix theta = verify::random_theta(spec.S, spec.A, rng);
        const double h = mdp::value_of(spec, theta, 1.0) - mdp::value_of(spec, theta, 0.0);
        worst = std::max(worst, h - bound);
        tight = std::max(tight, h / bound);
      }
      merge_report(&reports, verify::PropertyReport::from("mdp_discounted_entropy_bound", t,
                                                          worst, tight, verify::kDefaultTolerance));
    }
    if (std::string(name) != "cliff_world") {
      merge_report(&reports,
                   verify::check_smoothness(spec, 0.0, mdp::smoothness(spec.gamma), t, rng));
      merge_report(&reports, verify::check_reversed_lojasiewicz(spec, t, rng));
    }
  }

  // Emit the CSV and count failures.
  fs::create_directories(cfg.out_dir);
  std::ostringstream os;
  os << "name,trials,max_violation,tightness,pass\n";
  int failures = 0;
  for (const auto& [name, r] : reports) {
    os << r.name << ',' << r.trials << ',' << format_csv_double(r.max_violation) << ','
       << format_csv_double(r.tightness) << ',' << (r.pass ? "true" : "false") << '\n';
    if (!r.pass) ++failures;
    if (reports_out) reports_out->push_back(r);
  }
  write_file((fs::path(cfg.out_dir) / "properties.csv").string(), os.str(), nullptr);
  return failures;
}

namespace {

int run_verify_preset(const ExperimentConfig& cfg, ExperimentResult* result) {
  VerifyConfig vcfg;
  vcfg.seed = cfg.base_seed;
  vcfg.out_dir = cfg.out_dir;
  std::vector<verify::PropertyReport> reports;
  const int failures = verify_suite(vcfg, &reports);
  result->total_runs = static_cast<int>(reports.size());
  result->files.push_back((fs::path(cfg.out_dir) / "properties.csv").string());
  return failures;
}

}  // namespace

}  // namespace softpg::harness
