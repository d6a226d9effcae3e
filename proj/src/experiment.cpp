#include "grokdyn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "grokdyn/fourier.hpp"
#include "grokdyn/svg.hpp"

namespace grokdyn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Keeps the init stream distinct from the split stream that uses the raw seed.
constexpr std::uint64_t kInitSalt = 0x9e3779b97f4a7c15ULL;
constexpr double kOnsetThreshold = 0.99;

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

Index get_index(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<Index>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<Index>(d);
  }
  throw InvalidArgument("config key '" + key + "' must be an integer");
}

double get_double(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  throw InvalidArgument("config key '" + key + "' must be a number");
}

std::string get_string(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  throw InvalidArgument("config key '" + key + "' must be a string");
}

std::vector<std::uint64_t> get_seeds(const nlohmann::json& v) {
  if (v.is_string()) return parse_seed_list(v.get<std::string>());
  if (v.is_number_integer()) {
    if (v.get<long long>() < 0) throw InvalidArgument("seeds must be non-negative");
    return {v.get<std::uint64_t>()};
  }
  if (v.is_array()) {
    std::vector<std::uint64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        throw InvalidArgument("seeds must be non-negative integers");
      }
      out.push_back(e.get<std::uint64_t>());
    }
    return out;
  }
  throw InvalidArgument("config key 'seeds' must be an integer, list or string");
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson read_json(const fs::path& path) {
  try {
    return ojson::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_text(path, ss.str());
}

ojson null_if_nan(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson summary_json(const MetricsLog& log) {
  const RunSummary s = summarize(log, kOnsetThreshold);
  ojson j;
  j["final_step"] = s.final_step;
  j["final_train_loss"] = null_if_nan(s.final_train_loss);
  j["final_test_loss"] = null_if_nan(s.final_test_loss);
  j["final_train_acc"] = s.final_train_acc;
  j["final_test_acc"] = s.final_test_acc;
  j["onset_threshold"] = kOnsetThreshold;
  j["grokking_onset"] = s.grokking_onset ? ojson(*s.grokking_onset) : ojson(nullptr);
  return j;
}

/// Config echo without the fields that do not affect results.
ojson config_echo(const RunConfig& cfg) {
  ojson j = cfg.to_json();
  j.erase("out_dir");
  j.erase("jobs");
  return j;
}

ojson seed_summary(const RunConfig& cfg, std::uint64_t seed) {
  ojson j;
  j["subcommand"] = cfg.subcommand;
  j["seed"] = seed;
  j["config"] = config_echo(cfg);
  return j;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are kept per index.
std::vector<std::exception_ptr> parallel_for(std::size_t n, int jobs,
                                             const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Logger {
 public:
  explicit Logger(const LogFn& fn) : fn_(fn) {}
  void operator()(const std::string& line) {
    if (!fn_) return;
    std::lock_guard lock(mu_);
    fn_(line);
  }

 private:
  const LogFn& fn_;
  std::mutex mu_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- config

bool is_subcommand(const std::string& name) {
  return std::find_if(std::begin(kSubcommands), std::end(kSubcommands),
                      [&](const char* s) { return name == s; }) != std::end(kSubcommands);
}

std::string default_out_dir() {
  const char* env = std::getenv("GROKDYN_OUT");
  return env && *env ? std::string(env) : std::string("runs");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw InvalidArgument("empty seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        if (item.find_first_not_of(" 0123456789") != std::string::npos) {
          throw std::invalid_argument(item);
        }
        out.push_back(std::stoull(item));
      }
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse seed '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("seed list is empty");
  return out;
}

RunConfig RunConfig::defaults_for(const std::string& subcommand) {
  if (!is_subcommand(subcommand)) throw InvalidArgument("unknown subcommand '" + subcommand + "'");
  RunConfig c;
  c.subcommand = subcommand;
  c.out_dir = default_out_dir() + "/" + subcommand;
  if (subcommand == "train-real" || subcommand == "probe-cosine") {
    c.p = 11;
    c.d_h = 128;
    c.n_test = 7;
    c.lambda = 1e-4;
    c.eta = 1.0;
    c.beta = 0.0;
    c.steps = 20000;
    c.seeds = seed_range(5);
    c.log_stride = 10;
    if (subcommand == "probe-cosine") {
      c.steps = 5000;
      c.snapshot_stride = 10;
    }
  } else if (subcommand == "sim-isolated") {
    c.p = 37;
    c.d_h = 512;
    c.f_s = 0.7;
    c.lambda = 0.0;
    c.eta = 1e-3;
    c.steps = 5000;
    c.seeds = seed_range(5);
    c.log_stride = 1;
    c.snapshot_stride = 1000;
    c.reduction = "sum";
  } else if (subcommand == "toy") {
    c.lambda = 0.1;
    c.eta = 0.01;
    c.steps = 50000;
    c.log_stride = 10;
    c.reduction = "sum";
  } else if (subcommand == "gradcheck") {
    c.p = 7;
    c.d_h = 32;
    c.lambda = 1e-3;
    c.reduction = "sum";
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& fallback_subcommand) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  std::string sub = fallback_subcommand;
  if (j.contains("subcommand")) sub = get_string(j["subcommand"], "subcommand");
  if (sub.empty()) throw InvalidArgument("config does not name a subcommand");
  RunConfig c = defaults_for(sub);

  using Setter = std::function<void(RunConfig&, const nlohmann::json&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"subcommand", [](RunConfig&, const nlohmann::json&, const std::string&) {}},
      {"p", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.p = static_cast<int>(get_index(v, k));
       }},
      {"d_h", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.d_h = get_index(v, k); }},
      {"f_s", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.f_s = get_double(v, k); }},
      {"n_test", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.n_test = get_index(v, k); }},
      {"lambda", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.lambda = get_double(v, k); }},
      {"eta", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.eta = get_double(v, k); }},
      {"beta", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.beta = get_double(v, k); }},
      {"steps", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.steps = get_index(v, k); }},
      {"c", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.c = get_index(v, k); }},
      {"seeds", [](RunConfig& r, const nlohmann::json& v, const std::string&) { r.seeds = get_seeds(v); }},
      {"seed", [](RunConfig& r, const nlohmann::json& v, const std::string&) { r.seeds = get_seeds(v); }},
      {"snapshot_stride", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.snapshot_stride = get_index(v, k);
       }},
      {"log_stride", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.log_stride = get_index(v, k);
       }},
      {"probe_stride", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.probe_stride = get_index(v, k);
       }},
      {"activation", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.activation = get_string(v, k);
       }},
      {"reduction", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.reduction = get_string(v, k);
       }},
      {"out_dir", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.out_dir = get_string(v, k); }},
      {"jobs", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.jobs = static_cast<int>(get_index(v, k));
       }},
      {"kind", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.kind = get_string(v, k); }},
      {"init", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         if (v.is_array()) {
           std::string s;
           for (const auto& e : v) {
             if (!s.empty()) s += ",";
             s += fmt("%.17g", get_double(e, k));
           }
           r.init = s;
         } else {
           r.init = get_string(v, k);
         }
       }},
      {"input", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.input = get_string(v, k); }},
      {"baseline", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.baseline = get_string(v, k);
       }},
      {"projection_steps", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.projection_steps = get_index(v, k);
       }},
      {"projection_eta", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.projection_eta = get_double(v, k);
       }},
      {"projection_beta", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.projection_beta = get_double(v, k);
       }},
      {"accept_loss", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.accept_loss = get_double(v, k);
       }},
      {"fd_step", [](RunConfig& r, const nlohmann::json& v, const std::string& k) { r.fd_step = get_double(v, k); }},
      {"tolerance", [](RunConfig& r, const nlohmann::json& v, const std::string& k) {
         r.tolerance = get_double(v, k);
       }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw InvalidArgument("unknown config key '" + key + "'");
    it->second(c, value, key);
  }
  return c;
}

ojson RunConfig::to_json() const {
  ojson j;
  j["subcommand"] = subcommand;
  j["p"] = p;
  j["d_h"] = d_h;
  j["f_s"] = f_s;
  j["n_test"] = n_test;
  j["lambda"] = lambda;
  j["eta"] = eta;
  j["beta"] = beta;
  j["steps"] = steps;
  j["c"] = c;
  j["seeds"] = seeds;
  j["snapshot_stride"] = snapshot_stride;
  j["log_stride"] = log_stride;
  j["probe_stride"] = probe_stride;
  j["activation"] = activation;
  j["reduction"] = reduction;
  j["out_dir"] = out_dir;
  j["jobs"] = jobs;
  j["kind"] = kind;
  j["init"] = init;
  j["input"] = input;
  j["baseline"] = baseline;
  j["projection_steps"] = projection_steps;
  j["projection_eta"] = projection_eta;
  j["projection_beta"] = projection_beta;
  j["accept_loss"] = accept_loss;
  j["fd_step"] = fd_step;
  j["tolerance"] = tolerance;
  return j;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument(msg); };
  if (!is_subcommand(subcommand)) fail("unknown subcommand '" + subcommand + "'");
  if (seeds.empty()) fail("at least one seed is required");
  if (jobs < 1) fail("jobs must be >= 1");
  if (out_dir.empty()) fail("out_dir must not be empty");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta must be finite and > 0");
  if (!(beta >= 0.0 && beta < 1.0)) fail("beta must lie in [0, 1)");
  if (log_stride < 1) fail("log_stride must be >= 1");
  if (snapshot_stride < 0) fail("snapshot_stride must be >= 0");

  const bool net = subcommand == "train-real" || subcommand == "probe-cosine" ||
                   subcommand == "sim-isolated";
  if (net || subcommand == "gradcheck") {
    if (p < 3) fail("p must be >= 3");
    if (d_h < 1) fail("d_h must be >= 1");
    parsed_activation();
  }
  if (net) {
    if (steps < 0) fail("steps must be >= 0");
    const Index k = static_cast<Index>(p) * (p + 1) / 2;
    Index n_train = 0;
    if (n_test > 0) {
      if (n_test >= k) fail("n_test must be smaller than the number of pairs");
      n_train = k - n_test;
    } else {
      if (!(f_s > 0.0 && f_s < 1.0)) fail("f_s must lie in (0, 1)");
      n_train = train_size_for(k, f_s);
      if (n_train < 1 || n_train >= k) fail("f_s leaves an empty train or test split");
    }
    if (reduction != "sum" && reduction != "mean") fail("reduction must be 'sum' or 'mean'");
    if (subcommand == "sim-isolated") {
      if (d_h <= n_train) {
        fail("sim-isolated needs d_h > n_train (" + std::to_string(d_h) +
             " <= " + std::to_string(n_train) + ")");
      }
    }
    if (subcommand == "probe-cosine") {
      if (c < 1) fail("c must be >= 1");
      if (probe_stride < 1) fail("probe_stride must be >= 1");
      if (snapshot_stride < 1) fail("probe-cosine needs snapshot_stride >= 1");
      if (probe_stride % snapshot_stride != 0 || c % snapshot_stride != 0) {
        fail("snapshot_stride must divide both probe_stride and c");
      }
      if (projection_steps < 1) fail("projection_steps must be >= 1");
      if (!(projection_eta > 0.0)) fail("projection_eta must be > 0");
      if (!(projection_beta >= 0.0 && projection_beta < 1.0)) fail("projection_beta must lie in [0, 1)");
      if (!(accept_loss > 0.0)) fail("accept_loss must be > 0");
    }
  }
  if (subcommand == "toy") {
    if (steps < 0) fail("steps must be >= 0");
    if (beta != 0.0) fail("toy runs use plain gradient descent (beta must be 0)");
    const ToyKind k = parse_toy_kind(kind);
    if (init != "default" && init != "random") {
      const auto v = parse_number_list(init);
      if (static_cast<Index>(v.size()) != toy_dimension(k)) {
        fail("init for " + kind + " needs " + std::to_string(toy_dimension(k)) + " numbers");
      }
    }
  }
  if (subcommand == "fourier" && input.empty()) fail("fourier needs an input embedding (input)");
  if (subcommand == "gradcheck") {
    if (!(lambda > 0.0)) fail("gradcheck needs lambda > 0");
    if (!(fd_step > 0.0)) fail("fd_step must be > 0");
    if (!(tolerance > 0.0)) fail("tolerance must be > 0");
  }
}

double RunConfig::data_scale(Index n_train) const {
  if (reduction == "mean" && n_train > 0) {
    return 1.0 / (static_cast<double>(n_train) * static_cast<double>(p));
  }
  return 1.0;
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimension:
      return 2;
    case ErrorCode::kDivergence:
    case ErrorCode::kRankDeficient:
    case ErrorCode::kNumerical:
    case ErrorCode::kInsufficientHistory:
      return 3;
    case ErrorCode::kIo:
      return 4;
    case ErrorCode::kCheckFailed:
      return 1;
  }
  return 1;
}

ojson environment_fingerprint(std::uint64_t seed) {
  ojson j;
  j["version"] = GROKDYN_VERSION;
  j["seed"] = seed;
  j["float_bits"] = static_cast<int>(sizeof(double) * 8);
  j["rng"] = kRngName;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
#if defined(__clang__)
  j["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = "gcc " __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  return j;
}

// ---------------------------------------------------------------- per-seed runners

Dataset split_for(const RunConfig& cfg, std::uint64_t seed) {
  Dataset d = build_dataset(cfg.p);
  if (cfg.n_test > 0) {
    const Index n_train = d.size() - cfg.n_test;
    return split_dataset_count(std::move(d), n_train, seed);
  }
  return split_dataset(std::move(d), cfg.f_s, seed);
}

TrainSeedRun run_train_seed(const RunConfig& cfg, std::uint64_t seed) {
  TrainSeedRun run;
  run.seed = seed;
  run.dataset = split_for(cfg, seed);
  const TrainTest tt = materialize(run.dataset);
  const Activation act = cfg.parsed_activation();
  std::mt19937_64 rng(seed ^ kInitSalt);
  const NetParams init = init_fan_in_uniform(cfg.p, cfg.d_h, cfg.p, act, rng);

  const bool probing = cfg.subcommand == "probe-cosine";
  TrainConfig tc;
  tc.steps = cfg.steps;
  tc.gd = {cfg.lambda, cfg.eta, cfg.beta, cfg.data_scale(tt.X_train.rows())};
  tc.log_stride = cfg.log_stride;
  tc.snapshot_stride = cfg.snapshot_stride;
  tc.window = cfg.c;
  run.train = train(tc, tt, init);

  if (probing) {
    ProbeOptions opt;
    opt.stride = cfg.probe_stride;
    opt.window = cfg.c;
    opt.projection = {cfg.projection_steps, cfg.projection_eta, cfg.projection_beta};
    opt.accept_loss = cfg.accept_loss;
    const ZeroLossProblem problem =
        make_net_problem(tt.X_train, tt.Y_train, init, tc.gd.data_scale);
    run.probe = cosine_series(problem, run.train.snapshots, opt);
  }
  return run;
}

SimSeedRun run_sim_seed(const RunConfig& cfg, std::uint64_t seed) {
  SimSeedRun run;
  run.seed = seed;
  run.dataset = split_for(cfg, seed);
  const TrainTest tt = materialize(run.dataset);
  SimulateConfig sc;
  sc.d_h = cfg.d_h;
  sc.eta = cfg.eta;
  sc.steps = cfg.steps;
  sc.activation = cfg.parsed_activation();
  sc.log_stride = cfg.log_stride;
  sc.snapshot_stride = cfg.snapshot_stride;
  std::mt19937_64 rng(seed ^ kInitSalt);
  const Matrix E0 = init_embedding(cfg.p, cfg.d_h, rng);
  run.sim = simulate(sc, tt, E0);
  return run;
}

ToyModel toy_model_for(const RunConfig& cfg, std::uint64_t seed) {
  ToyModel m = ToyModel::with_defaults(parse_toy_kind(cfg.kind), cfg.lambda);
  if (cfg.init == "random") {
    std::mt19937_64 rng(seed ^ kInitSalt);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < m.params.size(); ++i) m.params(i) = normal(rng);
  } else if (cfg.init != "default") {
    const auto v = parse_number_list(cfg.init);
    if (static_cast<Index>(v.size()) != m.params.size()) {
      throw InvalidArgument("init has the wrong number of entries for " + cfg.kind);
    }
    for (Index i = 0; i < m.params.size(); ++i) m.params(i) = v[static_cast<std::size_t>(i)];
  }
  return m;
}

ToySeedRun run_toy_seed(const RunConfig& cfg, std::uint64_t seed) {
  const ToyModel m = toy_model_for(cfg, seed);
  ToySeedRun run;
  run.seed = seed;
  run.init = m.params;
  ToyRunOptions opt;
  opt.eta = cfg.eta;
  opt.steps = cfg.steps;
  opt.log_stride = cfg.log_stride;
  opt.test_seed = seed;
  run.trajectory = run_toy(m, opt);
  return run;
}

GradcheckReport run_gradcheck(const RunConfig& cfg, std::uint64_t seed) {
  const GradcheckInstance inst =
      make_gradcheck_instance(cfg.p, cfg.d_h, cfg.parsed_activation(), seed);
  GradcheckReport r;
  r.rows = inst.X.rows();
  r.max_rel_error = gradcheck(inst, cfg.lambda, cfg.fd_step);
  r.passed = r.max_rel_error < cfg.tolerance;
  return r;
}

// ---------------------------------------------------------------- aggregation

MetricsLog mean_log(std::span<const MetricsLog> logs) {
  MetricsLog out;
  if (logs.empty()) return out;
  const std::size_t n = logs.front().rows.size();
  for (const auto& l : logs) {
    if (l.rows.size() != n) throw DimensionError("logs have different lengths");
  }
  const double inv = 1.0 / static_cast<double>(logs.size());
  for (std::size_t i = 0; i < n; ++i) {
    MetricsRow m;
    m.step = logs.front().rows[i].step;
    for (const auto& l : logs) {
      const MetricsRow& r = l.rows[i];
      if (r.step != m.step) throw DimensionError("logs are not aligned by step");
      m.train_loss += r.train_loss * inv;
      m.test_loss += r.test_loss * inv;
      m.train_acc += r.train_acc * inv;
      m.test_acc += r.test_acc * inv;
      m.theta_norm += r.theta_norm * inv;
    }
    out.rows.push_back(m);
  }
  return out;
}

std::vector<ProbeResult> mean_probe(std::span<const std::vector<ProbeResult>> series) {
  std::map<Index, std::pair<ProbeResult, std::size_t>> acc;
  for (const auto& s : series) {
    for (const auto& r : s) {
      auto& [sum, count] = acc[r.step];
      sum.step = r.step;
      sum.cos_sim += r.cos_sim;
      sum.proj_loss += r.proj_loss;
      sum.update_norm += r.update_norm;
      sum.gtilde_norm += r.gtilde_norm;
      sum.on_manifold = (count == 0 || sum.on_manifold) && r.on_manifold;
      ++count;
    }
  }
  std::vector<ProbeResult> out;
  for (auto& [step, entry] : acc) {
    auto& [sum, count] = entry;
    if (count != series.size()) continue;
    const double inv = 1.0 / static_cast<double>(count);
    sum.cos_sim *= inv;
    sum.proj_loss *= inv;
    sum.update_norm *= inv;
    sum.gtilde_norm *= inv;
    out.push_back(sum);
  }
  return out;
}

CosineShape cosine_shape(const std::vector<ProbeResult>& mean_cos, const MetricsLog& mean_metrics) {
  CosineShape s;
  for (const auto& r : mean_metrics.rows) {
    if (r.train_acc >= 1.0 - 1e-12) {
      s.memorized_step = r.step;
      break;
    }
  }
  if (mean_cos.empty()) return s;
  const auto peak = std::max_element(mean_cos.begin(), mean_cos.end(),
                                     [](const auto& a, const auto& b) { return a.cos_sim < b.cos_sim; });
  s.peak_step = peak->step;
  s.peak_cos = peak->cos_sim;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : mean_cos) {
    if (s.memorized_step && r.step >= *s.memorized_step) break;
    sum += r.cos_sim;
    ++n;
  }
  s.pre_memorization_mean = n > 0 ? sum / static_cast<double>(n)
                                  : std::numeric_limits<double>::quiet_NaN();
  s.peak_after_memorization = s.memorized_step && s.peak_step > *s.memorized_step;
  s.peak_exceeds_pre = n > 0 && s.peak_cos > s.pre_memorization_mean;
  return s;
}

// ---------------------------------------------------------------- run

namespace {

void save_embedding(const Matrix& E, const fs::path& prefix) {
  FlatVector flat;
  flat.values = E.reshaped();
  flat.layout = {{"E", E.rows(), E.cols(), 0}};
  save_flat(flat, prefix);
}

Matrix load_matrix(const std::string& prefix) {
  const FlatVector flat = load_flat(prefix);
  if (flat.layout.empty()) throw IoError(prefix + ": layout is empty");
  const LayoutEntry& e = flat.layout.front();
  return flat.values.segment(e.offset, e.rows * e.cols).reshaped(e.rows, e.cols);
}

void write_metrics_files(const fs::path& dir, const MetricsLog& log) {
  write_with(dir / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(log, o); });
}

void run_train_like(const RunConfig& cfg, const fs::path& out, Logger& log) {
  const bool probing = cfg.subcommand == "probe-cosine";
  const std::size_t n = cfg.seeds.size();
  std::vector<MetricsLog> logs(n);
  std::vector<std::vector<ProbeResult>> probes(n);
  std::vector<ojson> summaries(n);
  std::vector<char> ok(n, 0);

  auto errors = parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const fs::path dir = out / seed_dir_name(seed);
    fs::create_directories(dir);
    ojson summary = seed_summary(cfg, seed);
    TrainSeedRun run;
    try {
      run = run_train_seed(cfg, seed);
    } catch (const TrainingDiverged& e) {
      write_metrics_files(dir, e.partial_log());
      summary["summary"] = summary_json(e.partial_log());
      summary["error"] = e.what();
      summary["environment"] = environment_fingerprint(seed);
      write_json(dir / "summary.json", summary);
      log("seed " + std::to_string(seed) + ": " + e.what());
      throw;
    }
    write_metrics_files(dir, run.train.log);
    summary["n_train"] = run.dataset.train_idx.size();
    summary["n_test"] = run.dataset.test_idx.size();
    summary["summary"] = summary_json(run.train.log);
    save_flat(flatten(run.train.final_params), dir / "params");
    if (!probing) {
      for (const auto& snap : run.train.snapshots) {
        FlatVector flat{snap.theta, flatten(run.train.final_params).layout};
        save_flat(flat, dir / ("params_step_" + std::to_string(snap.step)));
      }
    }
    if (run.probe) {
      write_with(dir / "probe.csv",
                 [&](std::ostream& o) { write_probe_csv(run.probe->results, o); });
      summary["probe_points"] = run.probe->results.size();
      ojson warnings = ojson::array();
      for (const auto& w : run.probe->warnings) {
        warnings.push_back({{"step", w.step}, {"message", w.message}});
      }
      summary["probe_warnings"] = warnings;
      probes[i] = run.probe->results;
    }
    summary["environment"] = environment_fingerprint(seed);
    write_json(dir / "summary.json", summary);
    const RunSummary s = summarize(run.train.log, kOnsetThreshold);
    log("seed " + std::to_string(seed) + ": train_acc " + fmt("%.4f", s.final_train_acc) +
        " test_acc " + fmt("%.4f", s.final_test_acc) + " onset " +
        (s.grokking_onset ? std::to_string(*s.grokking_onset) : std::string("none")));
    logs[i] = std::move(run.train.log);
    summaries[i] = std::move(summary);
    ok[i] = 1;
  });

  std::vector<MetricsLog> done;
  std::vector<std::vector<ProbeResult>> done_probes;
  ojson top;
  top["subcommand"] = cfg.subcommand;
  top["seeds"] = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    done.push_back(logs[i]);
    done_probes.push_back(probes[i]);
    top["seeds"].push_back(summaries[i]["seed"]);
  }
  if (!done.empty()) {
    const MetricsLog mean = mean_log(done);
    write_with(out / "metrics_mean.csv", [&](std::ostream& o) { write_metrics_csv(mean, o); });
    top["mean"] = summary_json(mean);
    if (probing) {
      const auto mean_cos = mean_probe(done_probes);
      write_with(out / "probe_mean.csv", [&](std::ostream& o) { write_probe_csv(mean_cos, o); });
      const CosineShape shape = cosine_shape(mean_cos, mean);
      ojson cs;
      cs["memorized_step"] = shape.memorized_step ? ojson(*shape.memorized_step) : ojson(nullptr);
      cs["peak_step"] = shape.peak_step;
      cs["peak_cos"] = shape.peak_cos;
      cs["pre_memorization_mean"] = null_if_nan(shape.pre_memorization_mean);
      cs["peak_after_memorization"] = shape.peak_after_memorization;
      cs["peak_exceeds_pre"] = shape.peak_exceeds_pre;
      top["cosine_shape"] = cs;
      log("mean cos peak " + fmt("%.4f", shape.peak_cos) + " at step " +
          std::to_string(shape.peak_step) + ", memorized at " +
          (shape.memorized_step ? std::to_string(*shape.memorized_step) : std::string("never")));
    }
  }
  top["environment"] = environment_fingerprint(cfg.seeds.front());
  write_json(out / "summary.json", top);
  rethrow_first(errors);
}

ojson fourier_section(const Matrix& E) { return fourier_report(dft_embedding(E)); }

void run_sim(const RunConfig& cfg, const fs::path& out, Logger& log) {
  const std::size_t n = cfg.seeds.size();
  std::vector<MetricsLog> logs(n);
  std::vector<char> ok(n, 0);
  std::vector<double> final_acc(n, 0.0);

  auto errors = parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const fs::path dir = out / seed_dir_name(seed);
    fs::create_directories(dir);
    ojson summary = seed_summary(cfg, seed);
    const Dataset split = split_for(cfg, seed);
    write_with(dir / "dataset.csv", [&](std::ostream& o) { write_dataset_csv(split, o); });
    SimSeedRun run;
    try {
      run = run_sim_seed(cfg, seed);
    } catch (const SimulationAborted& e) {
      write_metrics_files(dir, e.partial_log());
      summary["summary"] = summary_json(e.partial_log());
      summary["error"] = e.what();
      summary["environment"] = environment_fingerprint(seed);
      write_json(dir / "summary.json", summary);
      log("seed " + std::to_string(seed) + ": " + e.what());
      throw;
    }
    write_metrics_files(dir, run.sim.log);
    for (const auto& snap : run.sim.embeddings) {
      save_embedding(snap.E, dir / ("embedding_step_" + std::to_string(snap.step)));
    }
    const Matrix& E0 = run.sim.embeddings.front().E;
    const Matrix& ET = run.sim.embeddings.back().E;
    ojson fj;
    fj["seed"] = seed;
    fj["initial_step"] = run.sim.embeddings.front().step;
    fj["final_step"] = run.sim.embeddings.back().step;
    if (cfg.p % 2 == 1) {
      fj["initial"] = fourier_section(E0);
      fj["final"] = fourier_section(ET);
      write_json(dir / "fourier.json", fj);
    }

    summary["n_train"] = run.dataset.train_idx.size();
    summary["n_test"] = run.dataset.test_idx.size();
    summary["summary"] = summary_json(run.sim.log);
    summary["max_condition"] = run.sim.max_condition;
    summary["max_interpolation_residual"] = run.sim.max_interpolation_residual;
    double max_train_loss = 0.0;
    for (const auto& r : run.sim.log.rows) max_train_loss = std::max(max_train_loss, r.train_loss);
    summary["max_train_loss"] = max_train_loss;
    summary["environment"] = environment_fingerprint(seed);
    write_json(dir / "summary.json", summary);

    const RunSummary s = summarize(run.sim.log, kOnsetThreshold);
    final_acc[i] = s.final_test_acc;
    log("seed " + std::to_string(seed) + ": max train_loss " + fmt("%.3e", max_train_loss) +
        " test_acc " + fmt("%.4f", s.final_test_acc) + " onset " +
        (s.grokking_onset ? std::to_string(*s.grokking_onset) : std::string("none")) +
        " max cond " + fmt("%.3e", run.sim.max_condition));
    logs[i] = std::move(run.sim.log);
    ok[i] = 1;
  });

  std::vector<MetricsLog> done;
  ojson top;
  top["subcommand"] = cfg.subcommand;
  top["seeds"] = ojson::array();
  int converged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    done.push_back(logs[i]);
    top["seeds"].push_back(cfg.seeds[i]);
    if (final_acc[i] >= kOnsetThreshold) ++converged;
  }
  top["converged_seeds"] = converged;
  if (!done.empty()) {
    const MetricsLog mean = mean_log(done);
    write_with(out / "metrics_mean.csv", [&](std::ostream& o) { write_metrics_csv(mean, o); });
    top["mean"] = summary_json(mean);
  }
  top["environment"] = environment_fingerprint(cfg.seeds.front());
  write_json(out / "summary.json", top);
  rethrow_first(errors);
}

void run_toy_cmd(const RunConfig& cfg, const fs::path& out, Logger& log) {
  const std::size_t n = cfg.seeds.size();
  auto errors = parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const fs::path dir = out / seed_dir_name(seed);
    fs::create_directories(dir);
    const ToySeedRun run = run_toy_seed(cfg, seed);
    write_with(dir / "trajectory.csv", [&](std::ostream& o) { write_toy_csv(run.trajectory, o); });
    const ToyStep& last = run.trajectory.back();
    ojson summary = seed_summary(cfg, seed);
    summary["init"] = std::vector<double>(run.init.data(), run.init.data() + run.init.size());
    summary["final"] = std::vector<double>(last.theta.data(), last.theta.data() + last.theta.size());
    summary["final_train_loss"] = last.train_loss;
    summary["final_test_loss"] = null_if_nan(last.test_loss);
    std::optional<Index> memorized;
    for (const auto& s : run.trajectory) {
      if (s.train_loss < 1e-3) {
        memorized = s.step;
        break;
      }
    }
    summary["memorization_step"] = memorized ? ojson(*memorized) : ojson(nullptr);
    summary["environment"] = environment_fingerprint(seed);
    write_json(dir / "summary.json", summary);
    std::string theta;
    for (Index j = 0; j < last.theta.size(); ++j) theta += (j ? ", " : "") + fmt("%.6f", last.theta(j));
    log("seed " + std::to_string(seed) + ": final (" + theta + ") train_loss " +
        fmt("%.3e", last.train_loss));
  });
  rethrow_first(errors);
}

void run_fourier_cmd(const RunConfig& cfg, const fs::path& out, Logger& log) {
  const Matrix E = load_matrix(cfg.input);
  ojson fj;
  fj["input"] = cfg.input;
  if (!cfg.baseline.empty()) {
    fj["baseline"] = cfg.baseline;
    fj["initial"] = fourier_section(load_matrix(cfg.baseline));
  }
  fj["final"] = fourier_section(E);
  write_json(out / "fourier.json", fj);
  const auto& rank = fj["final"]["power_rank"];
  std::string top;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, rank.size()); ++i) {
    top += (i ? "," : "") + std::to_string(rank[i].get<int>());
  }
  log("fourier: p=" + std::to_string(E.rows()) + " top frequencies " + top +
      " mean overlap " + fmt("%.4f", fj["final"]["mean_off_diagonal_overlap"].get<double>()));
}

void run_gradcheck_cmd(const RunConfig& cfg, const fs::path& out, Logger& log) {
  ojson j;
  j["activation"] = cfg.activation;
  j["tolerance"] = cfg.tolerance;
  j["results"] = ojson::array();
  bool all = true;
  double worst = 0.0;
  for (const auto seed : cfg.seeds) {
    const GradcheckReport r = run_gradcheck(cfg, seed);
    j["results"].push_back({{"seed", seed}, {"rows", r.rows}, {"max_rel_error", r.max_rel_error},
                            {"passed", r.passed}});
    log("gradcheck seed " + std::to_string(seed) + ": max relative error " +
        fmt("%.3e", r.max_rel_error) + (r.passed ? " (ok)" : " (FAILED)"));
    all = all && r.passed;
    worst = std::max(worst, r.max_rel_error);
  }
  j["max_rel_error"] = worst;
  j["passed"] = all;
  j["environment"] = environment_fingerprint(cfg.seeds.front());
  write_json(out / "gradcheck.json", j);
  if (!all) {
    throw CheckFailed("gradcheck max relative error " + fmt("%.3e", worst) + " >= " +
                      fmt("%.1e", cfg.tolerance));
  }
}

}  // namespace

void run(const RunConfig& cfg, const LogFn& log_fn) {
  cfg.validate();
  Logger log(log_fn);
  const fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_json(out / "config.json", cfg.to_json());

  try {
    if (cfg.subcommand == "train-real" || cfg.subcommand == "probe-cosine") {
      run_train_like(cfg, out, log);
    } else if (cfg.subcommand == "sim-isolated") {
      run_sim(cfg, out, log);
    } else if (cfg.subcommand == "toy") {
      run_toy_cmd(cfg, out, log);
    } else if (cfg.subcommand == "fourier") {
      run_fourier_cmd(cfg, out, log);
    } else if (cfg.subcommand == "gradcheck") {
      run_gradcheck_cmd(cfg, out, log);
    }
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  } catch (const Error& e) {
    // Whatever finished is on disk; still render it before reporting.
    if (e.code() != ErrorCode::kIo && e.code() != ErrorCode::kInvalidArgument) {
      try {
        emit_plots(out);
      } catch (const Error&) {
      }
    }
    throw;
  }
  emit_plots(out);
  log("artifacts written to " + out.string());
}

// ---------------------------------------------------------------- plots

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("missing column '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(idx < r.size() ? r[idx] : std::nan(""));
    return out;
  }
  bool has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

bool use_log_x(const std::vector<double>& steps) {
  std::size_t positive = 0;
  for (double s : steps) positive += s > 0.0;
  return positive >= 2;
}

std::vector<double> mean_columns(const std::vector<std::vector<double>>& cols) {
  if (cols.empty()) return {};
  std::size_t n = cols.front().size();
  for (const auto& c : cols) n = std::min(n, c.size());
  std::vector<double> out(n, 0.0);
  for (const auto& c : cols) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c[i] / static_cast<double>(cols.size());
  }
  return out;
}

/// One figure with a translucent curve per seed and an opaque mean on top.
svg::LinePlot seed_figure(const std::string& title, const std::string& y_label,
                          const std::vector<Table>& tables, const std::vector<std::string>& columns,
                          bool log_y) {
  svg::LinePlot plot;
  plot.title = title;
  plot.x_label = "step";
  plot.y_label = y_label;
  plot.log_y = log_y;
  const bool many = tables.size() > 1;
  std::vector<double> all_steps;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<std::vector<double>> ys;
    std::vector<double> steps;
    for (const auto& t : tables) {
      steps = t.column("step");
      ys.push_back(t.column(columns[c]));
      if (many) {
        plot.series.push_back({"", steps, ys.back(), svg::palette(c), 0.3, 1.0});
      }
    }
    const auto mean = mean_columns(ys);
    steps.resize(mean.size());
    all_steps = steps;
    plot.series.push_back({many ? columns[c] + " (mean)" : columns[c], steps, mean,
                           svg::palette(c), 1.0, 2.0});
  }
  plot.log_x = use_log_x(all_steps);
  return plot;
}

void fourier_plots(const ojson& fj, const fs::path& dir) {
  auto norms = [&](const ojson& rep, const std::string& title, const fs::path& file) {
    svg::BarChart chart;
    chart.title = title;
    chart.y_label = "norm";
    svg::BarGroup re{"|Re F_k|", {}, svg::palette(0)};
    svg::BarGroup im{"|Im F_k|", {}, svg::palette(1)};
    for (const auto& f : rep["frequencies"]) {
      chart.categories.push_back(std::to_string(f["k"].get<int>()));
      re.values.push_back(f["norm_re"].get<double>());
      im.values.push_back(f["norm_im"].get<double>());
    }
    chart.groups = {re, im};
    write_text(file, svg::render(chart));
  };
  auto heat = [&](const ojson& rep, const std::string& title, const fs::path& file) {
    const auto& ov = rep["overlap"];
    svg::Heatmap map;
    map.title = title;
    const auto n = static_cast<Index>(ov.size());
    map.values = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      map.row_labels.push_back("k=" + std::to_string(i + 1));
      for (Index j = 0; j < n; ++j) {
        const auto& v = ov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        map.values(i, j) = v.is_number() ? v.get<double>() : 0.0;
      }
    }
    write_text(file, svg::render(map));
  };
  for (const char* part : {"initial", "final"}) {
    if (!fj.contains(part)) continue;
    const std::string p(part);
    norms(fj[part], "Fourier feature norms (" + p + ")", dir / ("fourier_norms_" + p + ".svg"));
    heat(fj[part], "Frequency overlap (" + p + ")", dir / ("overlap_" + p + ".svg"));
  }
}

void toy_plots(const Table& t, const std::string& kind, const fs::path& dir) {
  const auto w1 = t.column("w1");
  const auto w2 = t.column("w2");
  svg::LinePlot phase;
  phase.title = "trajectory (" + kind + ")";
  phase.x_label = kind == "parabola" ? "x" : "w1";
  phase.y_label = kind == "parabola" ? "y" : "w2";
  double lo = 0.0, hi = 0.0;
  for (double v : w1) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : w2) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  lo -= 0.5;
  hi += 0.5;
  svg::Series zero;
  zero.label = "";
  zero.color = "#888888";
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    double y = std::nan("");
    if (kind == "linear2" || kind == "leaky1") {
      y = 2.0 - x;
    } else if (kind == "two_layer_scalar") {
      if (std::abs(x) > 1e-3) y = 1.0 / x;
    } else if (kind == "parabola") {
      y = x * x;
    } else if (kind == "linear3" && t.has("w3")) {
      y = 3.0 - x - t.column("w3").back();  // slice of the plane at the final w3
    }
    if (std::isfinite(y) && y >= lo && y <= hi) {
      zero.x.push_back(x);
      zero.y.push_back(y);
    } else if (!zero.x.empty()) {
      phase.overlays.push_back(zero);
      zero.x.clear();
      zero.y.clear();
    }
  }
  if (!zero.x.empty()) phase.overlays.push_back(zero);
  phase.series.push_back({"theta_t", w1, w2, svg::palette(0), 1.0, 1.5});
  phase.series.push_back({"start", {w1.front()}, {w2.front()}, svg::palette(1), 1.0, 1.0, true});
  phase.series.push_back({"end", {w1.back()}, {w2.back()}, svg::palette(2), 1.0, 1.0, true});
  write_text(dir / "phase.svg", svg::render(phase));

  std::vector<std::string> cols{"train_loss"};
  if (kind != "parabola") cols.push_back("test_loss");
  write_text(dir / "loss.svg", svg::render(seed_figure("loss", "loss", {t}, cols, true)));
}

}  // namespace

void emit_plots(const fs::path& out) {
  const fs::path config_path = out / "config.json";
  if (!fs::exists(config_path)) throw IoError("no config.json in " + out.string());
  const ojson cj = read_json(config_path);
  RunConfig cfg;
  try {
    cfg = RunConfig::from_json(nlohmann::json::parse(cj.dump()));
  } catch (const InvalidArgument& e) {
    throw IoError(config_path.string() + ": " + e.what());
  }
  const std::string& sub = cfg.subcommand;

  if (sub == "train-real" || sub == "probe-cosine" || sub == "sim-isolated") {
    std::vector<Table> tables;
    for (const auto seed : cfg.seeds) {
      const fs::path m = out / seed_dir_name(seed) / "metrics.csv";
      if (fs::exists(m)) tables.push_back(read_table(m));
    }
    if (tables.empty()) throw IoError("no metrics.csv under " + out.string());
    const std::string tag = tables.size() > 1 ? " (" + std::to_string(tables.size()) + " seeds)" : "";
    write_text(out / "accuracy.svg",
               svg::render(seed_figure("accuracy" + tag, "accuracy", tables,
                                       {"train_acc", "test_acc"}, false)));
    write_text(out / "loss.svg", svg::render(seed_figure("loss" + tag, "loss", tables,
                                                         {"train_loss", "test_loss"}, true)));
    if (sub == "probe-cosine") {
      std::vector<Table> probes;
      for (const auto seed : cfg.seeds) {
        const fs::path pc = out / seed_dir_name(seed) / "probe.csv";
        if (fs::exists(pc)) probes.push_back(read_table(pc));
      }
      if (probes.empty()) throw IoError("no probe.csv under " + out.string());
      write_text(out / "cosine.svg",
                 svg::render(seed_figure("cos(update, norm-min direction)" + tag, "cosine",
                                         probes, {"cos_sim"}, false)));
    }
    if (sub == "sim-isolated") {
      for (const auto seed : cfg.seeds) {
        const fs::path dir = out / seed_dir_name(seed);
        if (fs::exists(dir / "fourier.json")) fourier_plots(read_json(dir / "fourier.json"), dir);
      }
    }
  } else if (sub == "toy") {
    bool any = false;
    for (const auto seed : cfg.seeds) {
      const fs::path dir = out / seed_dir_name(seed);
      if (!fs::exists(dir / "trajectory.csv")) continue;
      toy_plots(read_table(dir / "trajectory.csv"), cfg.kind, dir);
      any = true;
    }
    if (!any) throw IoError("no trajectory.csv under " + out.string());
  } else if (sub == "fourier") {
    if (!fs::exists(out / "fourier.json")) throw IoError("no fourier.json in " + out.string());
    fourier_plots(read_json(out / "fourier.json"), out);
  } else if (sub == "gradcheck") {
    if (!fs::exists(out / "gradcheck.json")) throw IoError("no gradcheck.json in " + out.string());
  }
}

}  // namespace grokdyn
