// grokdyn command-line runner. Talks to the library only through grokdyn.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grokdyn/grokdyn.h"

namespace {

const char* kSubcommands[] = {"toy", "train-real", "probe-cosine", "sim-isolated", "fourier",
                              "gradcheck"};

const char* kUsage =
    "usage: grokdyn <subcommand> [--config FILE] [--p N] [--dh N] [--fs F] [--lambda F]\n"
    "               [--eta F] [--steps N] [--seed N[,N...]] [--jobs N] [--out DIR] ...\n"
    "\n"
    "subcommands:\n"
    "  toy           gradient descent on a 2-3 parameter toy model\n"
    "  train-real    two-layer network on modular addition\n"
    "  probe-cosine  train-real plus update / norm-minimising direction cosine probe\n"
    "  sim-isolated  isolated embedding dynamics with the readout solved exactly\n"
    "  fourier       Fourier circularity report of a saved embedding\n"
    "  gradcheck     finite-difference check of the effective-dynamics gradient\n"
    "\n"
    "run `grokdyn <subcommand> --help` for every option.\n";

bool known(const std::string& s) {
  for (const char* k : kSubcommands) {
    if (s == k) return true;
  }
  return false;
}

void print_line(const char* line, void*) {
  std::fputs(line, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

std::string default_config(const std::string& sub) {
  size_t needed = 0;
  grokdyn_default_config(sub.c_str(), nullptr, 0, &needed);
  std::string buf(needed, '\0');
  if (grokdyn_default_config(sub.c_str(), buf.data(), buf.size(), &needed) != GROKDYN_OK) {
    return "{}";
  }
  buf.resize(needed - 1);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return 2;
  }
  const std::string sub = argv[1];
  if (sub == "--help" || sub == "-h") {
    std::fputs(kUsage, stdout);
    return 0;
  }
  if (sub == "--version") {
    std::printf("grokdyn %s\n", grokdyn_version());
    return 0;
  }
  if (!known(sub)) {
    std::fprintf(stderr, "grokdyn: unknown subcommand '%s'\n\n%s", sub.c_str(), kUsage);
    return 2;
  }

  CLI::App app("grokdyn " + sub, "grokdyn " + sub);
  std::string config_file;
  std::optional<int> p;
  std::optional<long long> dh, steps, c, n_test, log_stride, snapshot_stride, probe_stride;
  std::optional<double> fs, lambda, eta, beta;
  std::optional<std::string> seeds, out, activation, reduction, kind, init, input, baseline;
  std::optional<int> jobs;
  bool print_config = false;

  app.add_option("--config", config_file, "flat JSON config file (flags override it)");
  app.add_option("--p", p, "modulus");
  app.add_option("--dh", dh, "hidden width d_h");
  app.add_option("--fs", fs, "train fraction f_s");
  app.add_option("--n-test", n_test, "explicit test-set size (overrides --fs)");
  app.add_option("--lambda", lambda, "weight decay");
  app.add_option("--eta", eta, "learning rate");
  app.add_option("--beta", beta, "momentum");
  app.add_option("--steps", steps, "number of steps T");
  app.add_option("--c", c, "update-averaging window");
  app.add_option("--seed", seeds, "seed list, e.g. 0,1,2 or 0-4");
  app.add_option("--jobs", jobs, "seeds run concurrently");
  app.add_option("--out", out, "output directory (default $GROKDYN_OUT/<subcommand>)");
  app.add_option("--activation", activation, "relu, identity or leaky_relu:<slope>");
  app.add_option("--reduction", reduction, "training data term: sum or mean");
  app.add_option("--log-stride", log_stride, "metrics logging stride");
  app.add_option("--snapshot-stride", snapshot_stride, "parameter snapshot stride");
  app.add_option("--probe-stride", probe_stride, "cosine probe stride");
  app.add_option("--kind", kind, "toy model: linear2, linear3, two_layer_scalar, leaky1, parabola");
  app.add_option("--init", init, "toy init: default, random or comma-separated values");
  app.add_option("--input", input, "embedding prefix (path without .bin/.json) for fourier");
  app.add_option("--baseline", baseline, "baseline embedding prefix for fourier");
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    std::cout << "\ndefaults:\n" << default_config(sub) << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  nlohmann::json cfg = nlohmann::json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      std::fprintf(stderr, "grokdyn: cannot read config file %s\n", config_file.c_str());
      return 4;
    }
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      std::fprintf(stderr, "grokdyn: %s: %s\n", config_file.c_str(), e.what());
      return 2;
    }
    if (!cfg.is_object()) {
      std::fprintf(stderr, "grokdyn: %s: config must be a JSON object\n", config_file.c_str());
      return 2;
    }
  }
  cfg["subcommand"] = sub;
  if (p) cfg["p"] = *p;
  if (dh) cfg["d_h"] = *dh;
  if (fs) {
    cfg["f_s"] = *fs;
    if (!n_test) cfg["n_test"] = 0;
  }
  if (n_test) cfg["n_test"] = *n_test;
  if (lambda) cfg["lambda"] = *lambda;
  if (eta) cfg["eta"] = *eta;
  if (beta) cfg["beta"] = *beta;
  if (steps) cfg["steps"] = *steps;
  if (c) cfg["c"] = *c;
  if (seeds) {
    cfg.erase("seed");
    cfg["seeds"] = *seeds;
  }
  if (jobs) cfg["jobs"] = *jobs;
  if (out) cfg["out_dir"] = *out;
  if (activation) cfg["activation"] = *activation;
  if (reduction) cfg["reduction"] = *reduction;
  if (log_stride) cfg["log_stride"] = *log_stride;
  if (snapshot_stride) cfg["snapshot_stride"] = *snapshot_stride;
  if (probe_stride) cfg["probe_stride"] = *probe_stride;
  if (kind) cfg["kind"] = *kind;
  if (init) cfg["init"] = *init;
  if (input) cfg["input"] = *input;
  if (baseline) cfg["baseline"] = *baseline;

  if (print_config) {
    // Round-trip through the library so the printout is the effective config.
    nlohmann::json merged = nlohmann::json::parse(default_config(sub));
    for (const auto& [k, v] : cfg.items()) merged[k] = v;
    if (merged.contains("seed")) {
      merged["seeds"] = merged["seed"];
      merged.erase("seed");
    }
    std::cout << merged.dump(2) << "\n";
    return 0;
  }

  const grokdyn_status st = grokdyn_run(cfg.dump().c_str(), print_line, nullptr);
  if (st != GROKDYN_OK) {
    std::fprintf(stderr, "grokdyn: %s: %s\n", grokdyn_status_name(st), grokdyn_last_error());
    return grokdyn_exit_code(st);
  }
  return 0;
}
