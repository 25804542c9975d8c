#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kConfig = 3, kLibrary = 4, kRuntime = 5, kVerify = 6 };

int fail(int code, const std::string& kind, const std::string& message, const std::string& path = {}) {
  nlohmann::ordered_json e{{"error", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon temporal-mode shaping toolkit for single-atom cavity QED"};
  app.set_version_flag("--version", std::string(ps_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "Experiment config (JSON with explicit units)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides run.output)");
  app.add_option("--seed", seed, "Random seed (overrides run.seed)");
  app.add_option("--threads", threads, "Worker threads (overrides run.threads)")->check(CLI::PositiveNumber);

  cli::CommandOptions opts;
  auto* sweep = app.add_subcommand("sweep-efficiency", "Analytic efficiency versus detuning, with optional master-equation spot checks");
  auto* shape = app.add_subcommand("shape", "Synthesize the control pulse for a target shape");
  shape->add_flag("--no-compensation", opts.no_compensation, "Omit the light-shift phase compensation");
  auto* emit = app.add_subcommand("emit", "Master-equation simulation of shaped emission");
  auto* select = app.add_subcommand("select", "Phase-jump selectivity of storage");
  auto* convert = app.add_subcommand("convert", "Two-stage photon shape conversion");
  auto* homodyne = app.add_subcommand("homodyne", "Synthetic homodyne records and temporal-mode reconstruction");
  auto* budget = app.add_subcommand("budget", "Multiply an efficiency loss chain");
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Check the checksums listed in a run manifest");
  verify->add_option("dir", verify_dir, "Output directory holding manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  if (verify->parsed()) {
    const cli::VerifyResult r = cli::verify_manifest(verify_dir);
    if (!r.problems.empty()) {
      std::string msg;
      for (const auto& p : r.problems) msg += (msg.empty() ? "" : "; ") + p;
      return fail(kVerify, "manifest_mismatch", msg, verify_dir);
    }
    std::cout << r.checked << " outputs verified\n";
    return kOk;
  }

  try {
    cli::ExperimentConfig cfg =
        config_path.empty() ? cli::parse_config(nlohmann::ordered_json::object()) : cli::load_config(config_path);
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;

    CLI::App* cmd = app.get_subcommands().front();
    cli::RunManifest manifest(cfg.output_dir, cmd->get_name(), cfg.snapshot);
    nlohmann::ordered_json params{{"config_file", config_path}, {"seed", cfg.seed}, {"threads", cfg.threads}};
    if (cmd == shape) params["no_compensation"] = opts.no_compensation;
    manifest.set_parameters(params);

    if (cmd == sweep) {
      cli::cmd_sweep_efficiency(cfg, manifest);
    } else if (cmd == shape) {
      cli::cmd_shape(cfg, opts, manifest);
    } else if (cmd == emit) {
      cli::cmd_emit(cfg, manifest);
    } else if (cmd == select) {
      cli::cmd_select(cfg, manifest);
    } else if (cmd == convert) {
      cli::cmd_convert(cfg, manifest);
    } else if (cmd == homodyne) {
      cli::cmd_homodyne(cfg, manifest);
    } else if (cmd == budget) {
      cli::cmd_budget(cfg, manifest);
    }
    manifest.write();
  } catch (const cli::ConfigError& e) {
    return fail(kConfig, "configuration", e.what(), e.path);
  } catch (const cli::ApiFailure& e) {
    return fail(kLibrary, ps_status_name(e.status), e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, "runtime", e.what());
  }
  return kOk;
}
