#include <CLI11.hpp>

#include <iostream>

#include "magpi/cli.hpp"

int main(int argc, char** argv) {
  magpi::RunConfig cfg;
  std::string policy = "any";
  std::uint64_t seed = 0;
  std::vector<std::string> emit;

  CLI::App app{"magpi: parse, typecheck, verify and simulate failure-prone protocols"};
  app.add_option("command", cfg.command, "check | verify | simulate | explore | lts")
      ->required()
      ->check(CLI::IsMember(magpi::known_commands()));
  app.add_option("input", cfg.input, ".magpi file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (simulate)");
  app.add_option("--budget", cfg.budget, "state budget")->capture_default_str();
  app.add_option("--bound", cfg.bound, "server firings allowed per context path")->capture_default_str();
  app.add_option("--policy", policy, "any | never-drop | eager-drop | never-spurious-timeout")
      ->check(CLI::IsMember({"any", "never-drop", "eager-drop", "never-spurious-timeout"}))
      ->capture_default_str();
  app.add_option("--emit", emit, "json, derivation, lts-dot, trace")->delimiter(',');
  app.add_option("--out", cfg.out, "write output to a file");
  app.add_option("--max-steps", cfg.max_steps, "trace length (simulate)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : magpi::kExitUsage;
  }
  if (seed_opt->count()) cfg.seed = seed;
  cfg.policy = *magpi::parse_policy(policy);
  cfg.emit.insert(emit.begin(), emit.end());
  return magpi::run(cfg, std::cout, std::cerr);
}
