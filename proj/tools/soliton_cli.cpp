#include "soliton/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Pinned solitary waves: spectra, FGR atlas, evolution and dispersive checks"};
  app.require_subcommand(1);
  std::string config;
  for (const char *name : {"spectrum", "fgr", "evolve", "dispersive"}) {
    auto *sub = app.add_subcommand(name);
    sub->add_option("config", config, "experiment config (key = value with [sections])")->required()->check(CLI::ExistingFile);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : soliton::exit_config;
  }
  return soliton::run_command(app.get_subcommands().front()->get_name(), config, std::cerr);
}
