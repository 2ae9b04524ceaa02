// Command-line front end: parse a config file, dispatch to execute(), report.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "malsim/config.hpp"
#include "malsim/errors.hpp"
#include "malsim/execute.hpp"
#include "malsim/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "Path to the run config file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("-o,--out", args.out_dir,
                  "Output directory (overrides the config's [output] directory)");
  sub->add_option("-j,--threads", args.threads,
                  "Worker threads for independent runs")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--seedless",
                "Assert determinism: all computation is seed-free (no RNG is "
                "consumed anywhere); accepted for scripting symmetry");
}

int run_mode(const CommonArgs& args, malsim::RunMode expected) {
  const std::string text = read_file(args.config_path);
  malsim::RunConfig config = malsim::parse_config(text);
  if (config.mode != expected) {
    std::cerr << "error: config declares mode '" << malsim::mode_name(config.mode)
              << "' but the '" << malsim::mode_name(expected)
              << "' subcommand was invoked\n";
    return 2;
  }
  malsim::ExecOptions opt;
  opt.out_dir = args.out_dir;
  opt.threads = args.threads;
  const malsim::ReportBundle bundle = malsim::execute(config, opt);
  std::cout << "wrote " << bundle.files.size() << " files to " << bundle.out_dir
            << "\n";
  for (const malsim::RunResult& r : bundle.runs) {
    std::cout << "  " << r.name << ": " << (r.ok ? "ok" : "FAILED") << "\n";
    if (!r.ok) std::cout << "    " << r.error << "\n";
  }
  return bundle.all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Age-structured malaria transmission toolkit: simulation, reproduction "
      "number, equilibria, and stability certificates"};
  app.set_version_flag("--version", std::string(malsim::kToolVersion));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    malsim::RunMode mode;
  };
  const Sub subs[] = {
      {"simulate", "Integrate the age-structured system forward in time",
       malsim::RunMode::simulate},
      {"r0", "Compute the basic reproduction number", malsim::RunMode::r0},
      {"equilibria", "Compute parasite-free and endemic equilibria",
       malsim::RunMode::equilibria},
      {"stability", "Stability certificate for the constant-parameter endemic "
                    "state",
       malsim::RunMode::stability},
      {"sweep", "Sweep vector recruitment and track the epidemic threshold",
       malsim::RunMode::sweep},
      {"compare-ode", "Compare the age-structured run against the "
                      "constant-parameter compartment model",
       malsim::RunMode::compare_ode},
  };

  CommonArgs args[std::size(subs)];
  for (std::size_t k = 0; k < std::size(subs); ++k) {
    CLI::App* sub = app.add_subcommand(subs[k].name, subs[k].help);
    add_common(sub, args[k]);
    const malsim::RunMode mode = subs[k].mode;
    const CommonArgs* a = &args[k];
    sub->callback([a, mode] {
      const int rc = run_mode(*a, mode);
      if (rc != 0) throw CLI::RuntimeError(rc);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const malsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
