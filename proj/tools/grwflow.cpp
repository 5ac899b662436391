#include "grwflow/cli.hpp"
#include "grwflow/errors.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <thread>

namespace {

int load(const std::string &path, grwflow::cli::RunConfig &out) {
  try {
    out = grwflow::cli::parse_config(path);
    return 0;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return grwflow::cli::kRuntimeError;
  }
}

} // namespace

int main(int argc, char **argv) {
  namespace cli = grwflow::cli;
  CLI::App app{"Mean curvature flow of spacelike graphs in warped spacetimes, with runtime "
               "checks of the a priori estimates"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  std::string config, out, pattern;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto *run = app.add_subcommand("run", "integrate one config and write trace, report, manifest");
  run->add_option("--config", config, "JSON config file")->required();
  run->add_option("--out", out, "output directory (overrides GRWFLOW_OUT_DIR and output.dir)");

  auto *chk = app.add_subcommand("check", "hypotheses and theorem constants only");
  chk->add_option("--config", config, "JSON config file")->required();

  auto *swp = app.add_subcommand("sweep", "run many configs concurrently");
  swp->add_option("--glob", pattern, "config file pattern, e.g. 'configs/*.json'")->required();
  swp->add_option("--jobs", jobs, "concurrent runs (default: available cores)")
      ->check(CLI::PositiveNumber);
  swp->add_option("--out", out, "base output directory (default: GRWFLOW_OUT_DIR or 'sweep')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kRuntimeError;
  }

  if (*run) {
    cli::RunConfig rc;
    if (int e = load(config, rc)) {
      return e;
    }
    const auto dir = cli::resolve_out_dir(out, rc);
    const cli::RunResult r = cli::run(rc, dir, std::cerr);
    std::cout << r.verdict << ' ' << dir.string() << '\n';
    return r.exit_code;
  }
  if (*chk) {
    cli::RunConfig rc;
    if (int e = load(config, rc)) {
      return e;
    }
    return cli::check(rc, std::cout, std::cerr);
  }
  std::filesystem::path base = out;
  if (base.empty()) {
    const char *env = std::getenv("GRWFLOW_OUT_DIR");
    base = env && *env ? env : "sweep";
  }
  const int code = cli::sweep(cli::expand_glob(pattern), base, jobs, std::cerr);
  std::cout << (base / "index.json").string() << '\n';
  return code;
}
