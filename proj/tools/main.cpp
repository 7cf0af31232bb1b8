#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "app_config.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "vcrit/errors.hpp"

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace vcrit::app;

  CLI::App app{"Vortex-ring criticality toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string timeline_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "YAML configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (0: hardware concurrency)")->capture_default_str();
  };
  auto* gen = app.add_subcommand("generate", "write the initial vorticity field");
  auto* evo = app.add_subcommand("evolve", "integrate and write the snapshot timeline");
  auto* ana = app.add_subcommand("analyze", "sparseness, bmo and bound reports for a timeline");
  auto* hm = app.add_subcommand("harmonic", "harmonic-measure table");
  auto* ver = app.add_subcommand("verdict", "criticality verdict for a timeline");
  auto* all = app.add_subcommand("all", "generate, evolve, analyze, verdict (and harmonic)");
  for (auto* s : {gen, evo, all}) add_common(s, true);
  for (auto* s : {ana, hm, ver}) add_common(s, false);
  for (auto* s : {ana, ver}) s->add_option("--timeline", timeline_dir, "timeline directory (default: --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    CommandContext ctx;
    if (!config_path.empty()) {
      ctx.config = load_config(config_path);
      ctx.config_path = config_path;
    }
    if (seed) ctx.config.seed = *seed;
    ctx.seed = ctx.config.seed;
    ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    ctx.out_dir = out_dir;
    if (!timeline_dir.empty()) ctx.timeline_dir = timeline_dir;

    if (*gen) {
      std::cout << cmd_generate(ctx).string() << '\n';
    } else if (*evo) {
      const auto tl = cmd_evolve(ctx);
      std::cout << tl.size() << " snapshots, t = " << tl.snapshots().back().time << '\n';
    } else if (*ana) {
      const auto s = cmd_analyze(ctx);
      std::cout << "lambda = " << s.at("lambda").get<double>() << ", " << s.at("snapshots").size()
                << " snapshots analysed\n";
    } else if (*hm) {
      std::cout << cmd_harmonic(ctx).string() << '\n';
    } else if (*ver) {
      std::cout << cmd_verdict(ctx).at("verdict").get<std::string>() << '\n';
    } else if (*all) {
      std::cout << cmd_all(ctx).dump(2) << '\n';
    }
    return kOk;
  } catch (const vcrit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const vcrit::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kConfig;
  } catch (const vcrit::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kConfig;
  } catch (const vcrit::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const vcrit::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
