#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Band gaps of 2D fluid phononic crystals by a periodic fast multipole BEM"};
  std::string mode;
  std::string config;
  std::string out_dir = ".";
  int threads = 0;
  app.add_option("mode", mode, "sweep, single_frequency or verify")
      ->required()
      ->check(CLI::IsMember({"sweep", "single_frequency", "verify"}));
  app.add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "directory for output files");
  app.add_option("--threads", threads, "worker threads, 0 for the config or hardware default")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    pfmbem::RunConfig cfg = pfmbem::load_config(config);
    cfg.mode = pfmbem::parse_mode(mode);
    if (threads > 0) cfg.threads = threads;
    return pfmbem::run(cfg, out_dir, std::cout);
  } catch (const pfmbem::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
