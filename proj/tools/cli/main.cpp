#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "anisolt/harness/config.hpp"
#include "anisolt/harness/run.hpp"

namespace h = anisolt::harness;

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  bool describe = false;
};

h::RunConfig load(const std::string& experiment, const RunArgs& a) {
  std::string text;
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw h::ConfigError("cannot open config file '" + a.config + "'");
    std::ostringstream os;
    os << f.rdbuf();
    text = os.str();
  }
  h::RunConfig cfg = h::parse_config(experiment, text);
  if (a.seed) cfg.set("run.seed", std::to_string(*a.seed));
  if (a.threads) cfg.set("run.threads", std::to_string(*a.threads));
  // Validate the numeric run keys before anything runs.
  cfg.u64("run.seed");
  if (cfg.integer("run.threads") < 1) throw h::ConfigError("run.threads must be positive");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on local times of anisotropic Gaussian fields"};
  app.set_version_flag("--version", std::string(h::version()));
  app.require_subcommand(1);

  std::map<std::string, RunArgs> args;
  for (const auto& name : h::experiments()) {
    RunArgs& a = args[name];
    a.out = "runs/" + name;
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", a.config, "key = value config file (defaults apply to missing keys)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", a.seed, "override run.seed");
    sub->add_option("--threads", a.threads, "override run.threads")->check(CLI::Range(1U, 1024U));
    sub->add_option("--out", a.out, "output directory")->capture_default_str();
    sub->add_flag("--describe", a.describe, "print the accepted keys and defaults, then exit");
  }

  std::string manifest;
  std::optional<unsigned> replay_threads;
  std::optional<std::uint64_t> replay_seed;
  auto* rp = app.add_subcommand("replay", "re-run a recorded manifest and byte-compare its outputs");
  rp->add_option("manifest", manifest, "path to manifest.json")->required()->check(CLI::ExistingFile);
  rp->add_option("--threads", replay_threads, "thread count for the re-run")->check(CLI::Range(1U, 1024U));
  rp->add_option("--seed", replay_seed, "seed for the re-run (outputs then differ)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? h::exit_ok : h::exit_usage;
  }

  try {
    if (rp->parsed()) {
      const h::ReplayResult r = h::replay(manifest, replay_threads, replay_seed);
      for (const auto& f : r.compared) {
        const bool diff = std::find(r.differing.begin(), r.differing.end(), f) != r.differing.end();
        std::cout << (diff ? "DIFFERS   " : "identical ") << f << '\n';
      }
      std::cout << (r.identical ? "replay identical" : "replay differs") << '\n';
      return r.identical ? h::exit_ok : h::exit_mismatch;
    }
    for (const auto& name : h::experiments()) {
      if (!app.got_subcommand(name)) continue;
      const RunArgs& a = args[name];
      if (a.describe) {
        std::cout << name << " keys:\n" << h::describe_schema(name);
        return h::exit_ok;
      }
      const h::RunConfig cfg = load(name, a);
      return h::run(cfg, a.out, std::cout);
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\nrun with --describe to list the accepted keys\n";
    return h::exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::exit_error;
  }
  return h::exit_usage;
}
