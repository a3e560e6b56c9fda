#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "rv2x/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-phase V2X resource allocation simulator"};
  std::string config_path, allocator = "proposed", out_dir = "rv2x_out", error_law;
  int trials = 100;
  std::uint64_t seed = 0;
  double lambda_v = -1.0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--allocator", allocator, "proposed | gaussian | hpr")
      ->check(CLI::IsMember({"proposed", "gaussian", "hpr"}));
  app.add_option("--trials", trials, "Monte Carlo trials")->check(CLI::NonNegativeNumber);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--error-law", error_law, "type1 | type2 | custom (custom takes error_law from the config)")
      ->check(CLI::IsMember({"type1", "type2", "custom"}));
  app.add_option("--lambda-v", lambda_v, "absorption weight applied to every link")->check(CLI::Range(0.0, 1.0));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    rv2x::sim_config cfg = config_path.empty() ? rv2x::sim_config{} : rv2x::load_config(config_path);
    if (*seed_opt) cfg.rng_seed = seed;
    if (error_law == "type1") cfg.error_law = rv2x::error_distribution::type1();
    else if (error_law == "type2") cfg.error_law = rv2x::error_distribution::type2();
    else if (error_law == "custom" && config_path.empty())
      throw rv2x::config_error("--error-law custom requires --config with an error_law entry");
    if (lambda_v >= 0.0) cfg.hr_weights.assign(cfg.num_pairs, lambda_v);
    cfg.validate();

    auto rep = rv2x::run(cfg, rv2x::parse_allocator(allocator), trials);
    rv2x::emit(rep, out_dir);
    auto s = rv2x::summarize(rep);
    std::printf("ok allocator=%s trials=%d completed=%d out=%s\n", allocator.c_str(), trials, s.completed,
                out_dir.c_str());
    for (const auto& [t, cause] : s.partial) std::printf("partial trial=%d cause=\"%s\"\n", t, cause.c_str());
  } catch (const rv2x::config_error& e) {
    std::fprintf(stderr, "error kind=config message=\"%s\"\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error kind=runtime message=\"%s\"\n", e.what());
    return 1;
  }
  return 0;
}
