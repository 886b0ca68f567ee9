#include "anisolt/harness/run.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "anisolt/harness/experiments.hpp"
#include "json.hpp"

#ifndef ANISOLT_VERSION
#define ANISOLT_VERSION "unknown"
#endif

namespace anisolt::harness {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return ANISOLT_VERSION; }

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string summary_text(const RunConfig& config, const ExperimentResult& r) {
  json s = {{"experiment", config.experiment()}, {"summary", r.summary}, {"flags", r.flags}};
  return s.dump(2) + "\n";
}

}  // namespace

int run(const RunConfig& config, const fs::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(out);
  json artifacts = json::array();
  const std::string summary = summary_text(config, r);
  write_file(out / "summary.json", summary);
  artifacts.push_back({{"file", "summary.json"}, {"bytes", summary.size()}, {"fnv1a64", hex(fnv1a(summary))}});
  for (const auto& [name, text] : r.csv) {
    write_file(out / name, text);
    artifacts.push_back({{"file", name}, {"bytes", text.size()}, {"fnv1a64", hex(fnv1a(text))}});
  }
  json manifest = {{"experiment", config.experiment()},
                   {"version", version()},
                   {"config", config.canonical()},
                   {"seed", config.u64("run.seed")},
                   {"threads", config.integer("run.threads")},
                   {"wall_time_seconds", wall},
                   {"status", r.flags.empty() ? "ok" : "flagged"},
                   {"flags", r.flags},
                   {"artifacts", artifacts}};
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  log << config.experiment() << ": " << r.summary.dump() << '\n';
  for (const auto& f : r.flags) log << "flagged: " << f << '\n';
  return r.flags.empty() ? exit_ok : exit_flagged;
}

ReplayResult replay(const fs::path& manifest_path, std::optional<unsigned> threads,
                    std::optional<std::uint64_t> seed) {
  const json manifest = json::parse(read_file(manifest_path));
  const std::string experiment = manifest.at("experiment").get<std::string>();
  RunConfig config = parse_config(experiment, manifest.at("config").get<std::string>());
  if (threads) config.set("run.threads", std::to_string(*threads));
  if (seed) config.set("run.seed", std::to_string(*seed));

  const fs::path dir = manifest_path.parent_path();
  std::map<std::string, std::string> recorded;
  for (const auto& a : manifest.at("artifacts")) {
    const std::string name = a.at("file").get<std::string>();
    recorded[name] = read_file(dir / name);
  }

  const ExperimentResult r = run_experiment(config);
  std::map<std::string, std::string> fresh{{"summary.json", summary_text(config, r)}};
  for (const auto& [name, text] : r.csv) fresh[name] = text;

  ReplayResult res;
  for (const auto& [name, text] : recorded) {
    res.compared.push_back(name);
    const auto it = fresh.find(name);
    if (it == fresh.end() || it->second != text) res.differing.push_back(name);
  }
  for (const auto& [name, _] : fresh) {
    if (!recorded.count(name)) res.differing.push_back(name);
  }
  res.identical = res.differing.empty();
  return res;
}

}  // namespace anisolt::harness
