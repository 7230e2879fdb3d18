#include <algorithm>
#include <cstdio>
#include <exception>
#include <thread>

#include <CLI11.hpp>

#include "habitat/error.hpp"
#include "habitat/run_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Neumann habitat eigenvalue optimisation"};
  std::string config_path;
  std::string output_dir;
  bool overwrite = false;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run description")->required();
  app.add_option("--output", output_dir, "output directory (overrides output_dir)");
  app.add_flag("--overwrite", overwrite, "replace existing output files");
  app.add_option("--threads", threads, "worker threads for sweep rows, 0 = auto")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    habitat::RunConfig config = habitat::load_run_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (threads == 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto files = habitat::run(config, threads);
    habitat::write_outputs(config.output_dir, files, overwrite);
  } catch (const habitat::Error& e) {
    std::fprintf(stderr, "error %s: %s\n", std::string(habitat::error_code_name(e.code())).c_str(),
                 e.what());
    return habitat::exit_status(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error Internal: %s\n", e.what());
    return 2;
  }
  return 0;
}
