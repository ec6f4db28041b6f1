// betacrit command-line tool: betacrit <subcommand> --config PATH [--out DIR]
// [--threads N] [--verbose]

#include <CLI11.hpp>

#include <iostream>

#include "betacrit/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = betacrit::cli;
  CLI::App app{"Critical coupling constants and bound-state thresholds for exterior Schrodinger operators"};
  app.require_subcommand(1);
  cli::Options opt;
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " study");
    sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads")->capture_default_str();
    sub->add_flag("--verbose", opt.verbose, "progress notes on stderr");
    sub->callback([&opt, name] { opt.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << cli::detail::diagnostic("validation", "arguments", e.what(), 1) << "\n";
    return 1;
  }
  return cli::run(opt, std::cerr);
}
