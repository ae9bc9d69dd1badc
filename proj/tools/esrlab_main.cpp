#include "esrlab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"esrlab: spin resonance spectra, spin-Hamiltonian fits and mode hybridization"};
  app.set_version_flag("--version", std::string(ESRLAB_VERSION));
  app.require_subcommand(1);

  esrlab::cli::Request request;
  std::uint64_t seed = 0;
  std::string config, out = ".";
  for (const auto& name : esrlab::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run configuration (key = value with [sections])")->required();
    sub->add_option("--seed", seed, "overrides [run] seed");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->callback([&, name, sub] {
      request.command = name;
      request.config = config;
      request.out_dir = out;
      if (sub->count("--seed")) request.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << esrlab::cli::usage();
    return 2;
  }
  return esrlab::cli::run(request, std::cout, std::cerr);
}
