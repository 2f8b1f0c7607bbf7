// Command-line front end: spectral / reference / Monte-Carlo runners, surface
// comparison, and the self-validation suites.
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "wchaos/config.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/runner.hpp"
#include "wchaos/validate.hpp"

namespace {

constexpr const char* kUsage = R"(usage:
  wchaos run       --config <file> [--out <dir>]   chaos-spectral solve
  wchaos reference --config <file> [--out <dir>]   deterministic mean-field solve
  wchaos mc        --config <file> [--out <dir>]   path-sampling estimate
  wchaos compare   <fileA> <fileB> [--out <dir>]   error metrics, A vs reference B
  wchaos validate  [--perturb-hermite]             run the invariant suites

exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error
)";

std::string escape_quotes(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out;
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << "error kind=" << kind << " message=\"" << escape_quotes(message) << "\"\n";
}

struct Args {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> positional;
  bool perturb_hermite = false;
};

Args parse_args(int argc, char** argv, int start) {
  Args a;
  for (int i = start; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) throw wchaos::ConfigError("--config requires a path");
      a.config_path = argv[++i];
    } else if (arg == "--out") {
      if (i + 1 >= argc) throw wchaos::ConfigError("--out requires a directory");
      a.out_dir = argv[++i];
    } else if (arg == "--perturb-hermite") {
      a.perturb_hermite = true;
    } else if (!arg.empty() && arg[0] == '-') {
      throw wchaos::ConfigError("unknown flag '" + arg + "'");
    } else {
      a.positional.push_back(arg);
    }
  }
  return a;
}

wchaos::RunConfig load_run_config(const Args& a) {
  if (a.config_path.empty()) throw wchaos::ConfigError("--config <file> is required");
  if (!a.positional.empty()) {
    throw wchaos::ConfigError("unexpected argument '" + a.positional.front() + "'");
  }
  wchaos::RunConfig cfg = wchaos::load_config_file(a.config_path);
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  return cfg;
}

int dispatch(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    emit_error("config", "a subcommand is required");
    return wchaos::kExitConfig;
  }
  const std::string cmd = argv[1];

  if (cmd == "run" || cmd == "reference" || cmd == "mc") {
    const Args a = parse_args(argc, argv, 2);
    const wchaos::RunConfig cfg = load_run_config(a);
    const wchaos::RunResult r = cmd == "run"         ? wchaos::run_spectral(cfg)
                                : cmd == "reference" ? wchaos::run_reference(cfg)
                                                     : wchaos::run_mc(cfg);
    for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
    return wchaos::kExitSuccess;
  }

  if (cmd == "compare") {
    const Args a = parse_args(argc, argv, 2);
    if (a.positional.size() != 2) {
      throw wchaos::ConfigError("compare needs exactly two surface files");
    }
    const wchaos::CompareReport rep = wchaos::run_compare(a.positional[0], a.positional[1], a.out_dir);
    std::cout << wchaos::format_metrics(rep);
    if (!a.out_dir.empty()) std::cout << "wrote " << a.out_dir << "/metrics.txt\n";
    return wchaos::kExitSuccess;
  }

  if (cmd == "validate") {
    const Args a = parse_args(argc, argv, 2);
    if (!a.positional.empty()) {
      throw wchaos::ConfigError("unexpected argument '" + a.positional.front() + "'");
    }
    const std::vector<wchaos::SuiteResult> results = wchaos::run_validate(a.perturb_hermite);
    bool all_pass = true;
    for (const auto& r : results) {
      std::cout << "suite " << r.name << ": " << (r.pass ? "PASS" : "FAIL");
      if (!r.pass) {
        std::cout << " (" << r.message << ")";
        all_pass = false;
      }
      std::cout << '\n';
    }
    std::cout << (all_pass ? "all suites passed" : "validation FAILED") << '\n';
    if (!all_pass) {
      emit_error("numerical", "one or more validation suites failed");
      return wchaos::kExitNumerical;
    }
    return wchaos::kExitSuccess;
  }

  std::cerr << kUsage;
  throw wchaos::ConfigError("unknown subcommand '" + cmd + "'");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const wchaos::ConfigError& e) {
    emit_error("config", e.what());
    return wchaos::kExitConfig;
  } catch (const wchaos::IoError& e) {
    emit_error("io", e.what());
    return wchaos::kExitIo;
  } catch (const wchaos::NumericalError& e) {
    emit_error("numerical", e.what());
    return wchaos::kExitNumerical;
  } catch (const std::exception& e) {
    emit_error("numerical", e.what());
    return wchaos::kExitNumerical;
  }
}
