#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "padiq/report.hpp"

namespace {

using padiq::RunOptions;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_env(padiq::dsl::Job& job) {
  if (const char* cap = std::getenv("PADIQ_LEVEL_CAP")) job.level_cap = std::stol(cap);
}

void print_summary(const padiq::Report& report, std::ostream& out) {
  auto j = report.to_json(false);
  for (const auto& c : j["commands"]) {
    out << "[" << c["status"].get<std::string>() << "] " << c["command"].get<std::string>();
    if (c.contains("value")) out << " = " << c["value"]["text"].get<std::string>();
    if (c.contains("values")) out << " = " << c["values"].size() << " values";
    if (c.contains("method")) out << " (" << c["method"].get<std::string>() << ")";
    if (!c["oracle_match"].is_null()) out << " oracle " << (c["oracle_match"].get<bool>() ? "match" : "MISMATCH");
    if (c.contains("error"))
      out << ": " << c["error"]["kind"].get<std::string>() << ": " << c["error"]["message"].get<std::string>();
    out << "\n";
  }
  out << report.commands.size() << " commands, " << report.failures() << " failures\n";
}

int run(const std::string& path, std::optional<long> prime, const RunOptions& opts, const std::string& json_path) {
  padiq::dsl::Job job;
  try {
    job = padiq::dsl::parse_job(read_file(path), prime);
    apply_env(job);
    job.field();
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  }
  padiq::Report report = padiq::run_job(job, opts);
  print_summary(report, std::cout);
  if (!json_path.empty()) {
    std::string text = report.to_json().dump(2) + "\n";
    if (json_path == "-") {
      std::cout << text;
    } else {
      std::ofstream out(json_path);
      out << text;
    }
  }
  return report.ok() ? 0 : 1;
}

// Small jobs with known answers, then random balls and cells per prime.
const char* kBuiltin[] = {
    "field p=3\nset B = ball(0, 0)\ncompare psi(x) over x in B\n",
    "field p=3\nset C = cell(c=0, alpha=0, beta=none, lambda=1, n=1, m=1)\ncompare psi(x) over x in C\n",
    "field p=3\nset G = gcell(alpha=-1, beta=none, k=0, n=1)\ncompare q^(-g) over g in G\n",
    "field p=3\nset B = ball(1, 0)\ncompare psi(x) over x in B\n",
    "field p=2\nset K = clustered(sigma={(): [ball(3, 0), ball(3, 1), ball(3, 3)]}, alpha=1, beta=3)\n"
    "compare psi(x) over x in K\n",
};

std::string random_job(std::mt19937_64& rng, long p) {
  std::uniform_int_distribution<long> radius(-3, 4), digit(0, p - 1), bound(-2, 2), width(1, 4);
  std::ostringstream job;
  job << "field p=" << p << "\n";
  for (int i = 0; i < 6; ++i) {
    long r = radius(rng);
    long c = digit(rng) + p * digit(rng);
    job << "set B" << i << " = ball(" << r << ", " << c << "/" << p << ")\n";
    job << "compare psi(x) over x in B" << i << "\n";
  }
  for (int i = 0; i < 4; ++i) {
    long a = bound(rng);
    job << "set C" << i << " = cell(c=" << digit(rng) << ", alpha=" << a << ", beta=" << a + width(rng)
        << ", lambda=" << 1 + digit(rng) << ", n=1, m=" << 1 + i % 2 << ")\n";
    job << "compare psi(x) over x in C" << i << "\n";
  }
  return job.str();
}

int selftest(std::uint64_t seed) {
  RunOptions opts;
  opts.compare_oracle = true;
  opts.seed = seed;
  std::size_t commands = 0, failures = 0;
  auto run_text = [&](const std::string& text) {
    padiq::dsl::Job job;
    try {
      job = padiq::dsl::parse_job(text);
    } catch (const padiq::Error& e) {
      std::cout << "selftest job rejected: " << e.what() << "\n" << text;
      ++failures;
      return;
    }
    apply_env(job);
    padiq::Report r = padiq::run_job(job, opts);
    commands += r.commands.size();
    failures += r.failures();
    if (!r.ok()) print_summary(r, std::cout);
  };
  for (const char* text : kBuiltin) run_text(text);
  std::mt19937_64 rng(seed);
  for (long p : {2L, 3L, 5L}) run_text(random_job(rng, p));
  std::cout << "selftest: " << commands << " commands, " << failures << " failures\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact p-adic integration of exponential-constructible functions"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a job file");
  std::string job_path, json_path;
  std::optional<long> prime;
  RunOptions opts;
  run_cmd->add_option("--job", job_path, "job file")->required();
  run_cmd->add_option("--prime", prime, "override the job's prime");
  run_cmd->add_flag("--compare-oracle", opts.compare_oracle, "check every integral against the oracle");
  run_cmd->add_option("--emit-json", json_path, "write the JSON report here ('-' for stdout)");
  run_cmd->add_option("--seed", opts.seed, "oracle sampling seed");
  run_cmd->add_flag("--parallel", opts.parallel, "run commands concurrently");
  run_cmd->add_flag("--inject-mismatch", opts.inject_mismatch, "perturb oracle values (testing)")
      ->group("");

  auto* self = app.add_subcommand("selftest", "run the built-in property corpus against the oracle");
  std::uint64_t self_seed = 1;
  self->add_option("--seed", self_seed, "corpus seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(job_path, prime, opts, json_path);
    return selftest(self_seed);
  } catch (const std::exception& e) {
    std::cerr << "padiq: " << e.what() << "\n";
    return 2;
  }
}
