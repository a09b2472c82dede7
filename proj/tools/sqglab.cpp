#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sqg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dissipative SQG simulator and regularity diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run =
      app.add_subcommand("run", "Simulate a config and write a result bundle");
  run->add_option("--config", config_path, "flat key=value config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "bundle output directory")->required();

  std::string bundle_dir;
  CLI::App* verify = app.add_subcommand(
      "verify", "Re-hash a bundle and re-evaluate its records");
  verify->add_option("dir", bundle_dir, "bundle directory")->required();

  std::string snapshot_path, check;
  std::vector<std::string> raw_params;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Run one diagnostic check against a stored snapshot");
  diagnose->add_option("--snapshot", snapshot_path,
                       "snapshot file (unused by the barriers check)");
  diagnose
      ->add_option("--check", check,
                   "cordoba | extension_identity | holder | barriers")
      ->required();
  diagnose->add_option("--param", raw_params, "key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return sqg::cmd_run(config_path, out_dir);
  if (verify->parsed()) return sqg::cmd_verify(bundle_dir);
  if (diagnose->parsed()) {
    std::vector<std::pair<std::string, std::string>> params;
    for (const std::string& p : raw_params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) {
        std::cerr << "diagnose: --param expects key=value, got " << p << "\n";
        return 2;
      }
      params.emplace_back(p.substr(0, eq), p.substr(eq + 1));
    }
    return sqg::cmd_diagnose(snapshot_path, check, params);
  }
  return 2;
}
