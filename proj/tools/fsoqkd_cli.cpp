// Copyright 2026 The fsoqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: run, validate, defaults.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fsoqkd/fsoqkd.hpp"

namespace {

enum Exit { kOk = 0, kPartial = 1, kBadConfig = 2, kIo = 3, kInternal = 4 };

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fsoqkd::IoError(path, "cannot open for reading");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fsoqkd::SystemConfig load(const std::string& path) { return fsoqkd::parse_config(slurp(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-space MIMO CV-QKD secret-key-rate sweeps", "fsoqkd"};
  app.set_version_flag("--version", fsoqkd::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> formats;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("-f,--format", formats, "Output formats (csv, svg); overrides output.formats")
      ->check(CLI::IsMember({"csv", "svg"}));
  run->add_flag("-q,--quiet", quiet, "No progress on stderr");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  app.add_subcommand("defaults", "Print the default config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("defaults")) {
      std::cout << fsoqkd::serialize_config(fsoqkd::default_config());
      return kOk;
    }
    if (app.got_subcommand("validate")) {
      const auto c = load(config_path);
      std::cout << "ok " << fsoqkd::config_fingerprint(c) << " (" << c.sweep.grid().size() << " points on "
                << fsoqkd::axis_name(c.sweep.axis) << ")\n";
      return kOk;
    }
    auto c = load(config_path);
    if (!formats.empty()) c.formats = formats;
    const auto table = fsoqkd::run_sweep(c, [&](std::size_t k, std::size_t n, const fsoqkd::SweepRow& r) {
      if (quiet) return;
      std::cerr << "[" << (k + 1) << "/" << n << "] " << fsoqkd::axis_name(c.sweep.axis) << " = "
                << fsoqkd::format_double(r.axis);
      if (r.ok) {
        std::cerr << "  one-way " << r.skr_1way << "  two-way " << r.skr_2way << "\n";
      } else {
        std::cerr << "  FAILED: " << r.error << "\n";
      }
    });
    const auto manifest = fsoqkd::emit_outputs(table, out_dir, c.formats, c.output_name);
    std::size_t failed = 0;
    for (const auto& r : table.rows) failed += r.ok ? 0 : 1;
    for (const auto& f : manifest.files) std::cout << out_dir << "/" << f.path << "  " << f.hash << "\n";
    std::cout << out_dir << "/manifest.json\n";
    if (failed > 0) {
      std::cerr << failed << " of " << table.rows.size() << " points failed\n";
      return kPartial;
    }
    return kOk;
  } catch (const fsoqkd::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const fsoqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const fsoqkd::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
