// Command-line front end; talks to the library only through the C API.
#include "upress/upress.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool print_config = false;
};

using Handle = std::unique_ptr<upress_config, decltype(&upress_config_free)>;

int report(int status) {
  if (status != UPRESS_OK)
    std::fprintf(stderr, "upress: %s: reason=%s: %s\n", upress_status_name(status), upress_last_reason(),
                 upress_last_error());
  return status;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "YAML or JSON run configuration");
  cmd->add_option("--preset", o.preset, "built-in configuration name");
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", o.seed, "master seed (overrides seed)");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--print-config", o.print_config, "print the effective configuration and exit");
}

int load(const Options& o, Handle& handle, const CLI::App& cmd) {
  if (o.config.empty() == o.preset.empty()) {
    std::fprintf(stderr, "upress: usage: reason=usage: give exactly one of --config or --preset\n");
    return UPRESS_ERR_USAGE;
  }
  upress_config* raw = nullptr;
  const int st = o.config.empty() ? upress_config_from_preset(o.preset.c_str(), &raw)
                                  : upress_config_from_file(o.config.c_str(), &raw);
  if (st != UPRESS_OK) {
    if (!o.out.empty()) upress_write_error_report(o.out.c_str(), cmd.get_name().c_str(), st);
    return report(st);
  }
  handle.reset(raw);
  if (!o.out.empty() && report(upress_config_set_output_dir(raw, o.out.c_str()))) return UPRESS_ERR_USAGE;
  if (cmd.count("--seed") && report(upress_config_set_seed(raw, o.seed))) return UPRESS_ERR_USAGE;
  if (o.jobs > 0 && report(upress_config_set_jobs(raw, o.jobs))) return UPRESS_ERR_USAGE;
  return UPRESS_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unstable topological pressure of partially hyperbolic torus maps"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-presets", list, "print the built-in configuration names");

  Options opts;
  auto* estimate = app.add_subcommand("estimate", "pressure table and growth-rate estimate");
  auto* verify = app.add_subcommand("verify", "variational certificate and structural checks");
  auto* sweep = app.add_subcommand("sweep", "estimates along one parameter axis");
  auto* oracle = app.add_subcommand("oracle", "DP against exhaustive enumeration");
  for (auto* cmd : {estimate, verify, sweep, oracle}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : UPRESS_ERR_USAGE;
  }

  if (list) {
    for (size_t i = 0; const char* name = upress_preset_name(i); ++i) std::printf("%s\n", name);
    return 0;
  }
  const auto chosen = app.get_subcommands();
  if (chosen.empty()) {
    std::fprintf(stderr, "%s", app.help().c_str());
    return UPRESS_ERR_USAGE;
  }
  const CLI::App& cmd = *chosen.front();

  Handle handle(nullptr, &upress_config_free);
  if (const int st = load(opts, handle, cmd); st != UPRESS_OK) return st;

  if (opts.print_config) {
    char* text = nullptr;
    if (const int st = upress_config_to_string(handle.get(), &text); st != UPRESS_OK) return report(st);
    std::fputs(text, stdout);
    upress_string_free(text);
    return 0;
  }

  int st = UPRESS_OK;
  if (&cmd == estimate) {
    double value = 0.0;
    st = upress_run_estimate(handle.get(), &value);
    if (st == UPRESS_OK) std::printf("estimate %.10f\n", value);
  } else if (&cmd == verify) {
    st = upress_run_verify(handle.get());
  } else if (&cmd == sweep) {
    st = upress_run_sweep(handle.get());
  } else {
    st = upress_run_oracle(handle.get());
  }
  if (st == UPRESS_OK) std::printf("%s: ok\n", cmd.get_name().c_str());
  return report(st);
}
