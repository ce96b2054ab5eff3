#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qism/cli/commands.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", opt.seed, "override the configuration seed");
  sub->add_option("--out", opt.out, "write the report here instead of standard output");
  sub->add_option("--format", opt.format, "report format")->check(CLI::IsMember({"json", "table"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bethe ansatz verification toolkit for inhomogeneous XXX/XXZ spin-1/2 chains"};
  app.set_version_flag("--version", qism::cli::kToolkitVersion);
  app.require_subcommand(1);

  Options opt;
  for (const char* name : {"verify", "decompose", "solve", "spectrum"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, opt);
  }
  app.get_subcommand("verify")->description("R-matrix, RTT, commutation, vacuum and transfer-matrix suites");
  app.get_subcommand("decompose")->description("compare every Bethe-vector decomposition with the direct product");
  app.get_subcommand("solve")->description("solve the Bethe equations and match against the dense spectrum");
  app.get_subcommand("spectrum")->description("dense transfer-matrix spectrum at one probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  qism::cli::Report report;
  std::optional<std::string> out_path;
  try {
    qism::cli::RunConfig cfg = qism::cli::load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.out.empty()) out_path = opt.out;
    else if (cfg.output) out_path = cfg.output;
    report = qism::cli::run_command(command, cfg);
  } catch (const qism::Error& e) {
    std::cerr << "qism: " << e.what() << "\n";
    return 2;
  }

  const std::string text = opt.format == "table" ? report.table() : report.dump_json();
  if (out_path) {
    std::ofstream file(*out_path, std::ios::binary);
    if (!file || !(file << text)) {
      std::cerr << "qism: cannot write '" << *out_path << "'\n";
      return 2;
    }
  } else {
    std::cout << text;
  }
  return report.exit_code();
}
