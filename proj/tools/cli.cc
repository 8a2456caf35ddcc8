// Copyright 2026 The REALM Authors
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

#include "realm/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "realm/arbiter.h"
#include "realm/environment.h"
#include "realm/evaluation.h"
#include "realm/playground_server.h"
#include "realm/random.h"
#include "realm/sampler.h"
#include "realm/session.h"

namespace realm {

namespace {

namespace fs = std::filesystem;

// Raised for errors whose message is already user-facing.
struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ArbiterConfig LoadConfigOrDefault(const std::string& path) {
  if (path.empty()) return UncerpentineArbiterConfig();
  if (!fs::exists(path)) throw CliError("config file not found: " + path);
  return LoadArbiterConfig(path);
}

Environment LoadEnvironmentFile(const std::string& path) {
  if (!fs::exists(path)) throw CliError("environment file not found: " + path);
  try {
    return LoadEnvironment(path);
  } catch (const std::exception& e) {
    throw CliError("cannot read environment " + path + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CliError("cannot write " + path.string());
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw CliError("cannot create directory " + dir.string());
  }
}

struct GenEnvArgs {
  std::uint64_t seed = 0;
  int count = 1;
  std::string out;
  int teleop = -1;
  int corrective = -1;
  int junctions = -1;
  int min_gap = -1;
};

int CmdGenEnv(const GenEnvArgs& a, std::ostream& out) {
  GenerationConfig config;
  auto fix = [](SegmentKindConfig& kind, int n) {
    if (n >= 0) kind.count_min = kind.count_max = n;
  };
  fix(config.teleop, a.teleop);
  fix(config.corrective, a.corrective);
  fix(config.junction, a.junctions);
  if (a.min_gap >= 0) config.min_gap = a.min_gap;
  EnsureDirectory(a.out);
  for (int i = 0; i < a.count; ++i) {
    const Environment env =
        GenerateEnvironment(MixSeed(a.seed, static_cast<std::uint64_t>(i)), config);
    std::ostringstream name;
    name << "env-" << std::setw(3) << std::setfill('0') << i << ".json";
    WriteText(fs::path(a.out) / name.str(), SerializeEnvironment(env));
  }
  out << "wrote " << a.count << " environments to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> envs;
  std::string config;
  std::string out = "report";
  std::uint64_t seed = 0;
  int n_test = 100;
  int training = 900;
  int margin = -1;
  int rollouts = 50;
  double p_collapse = 0.0;
  bool baseline = false;
  double gamma = 0.3;
  int threads = 0;
};

std::string Percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

int CmdEval(const EvalArgs& a, std::ostream& out) {
  const ArbiterConfig config = LoadConfigOrDefault(a.config);
  std::vector<Environment> envs;
  for (const std::string& path : a.envs) envs.push_back(LoadEnvironmentFile(path));
  EnsureDirectory(a.out);

  EvaluationOptions options;
  options.test_trajectories = a.n_test;
  options.training_trajectories = a.training;
  options.margin_steps = a.margin;
  options.sampler.rollouts = a.rollouts;
  options.sampler.p_collapse = a.p_collapse;
  options.seed = a.seed;
  options.baseline = a.baseline;
  options.gamma = a.gamma;
  options.threads = a.threads;

  std::vector<EvaluationResult> results;
  nlohmann::json per_env = nlohmann::json::array();
  for (std::size_t i = 0; i < envs.size(); ++i) {
    results.push_back(EvaluateEnvironment(envs[i], config, options));
    const EvaluationResult& r = results.back();
    nlohmann::json entry = ToJson(r);
    entry["file"] = a.envs[i];
    entry["seed"] = envs[i].seed;
    per_env.push_back(std::move(entry));
    out << a.envs[i] << ": filtered diag " << Percent(r.filtered.Diagonal(0))
        << "/" << Percent(r.filtered.Diagonal(1)) << "/"
        << Percent(r.filtered.Diagonal(2)) << ", detection "
        << Percent(r.DetectionRate()) << "\n";
    for (const std::string& f : r.failures) out << "  failed " << f << "\n";
  }
  const SuiteSummary summary = Summarize(results);
  nlohmann::json report = {
      {"settings",
       {{"seed", a.seed},
        {"n_test", a.n_test},
        {"training_trajectories", a.training},
        {"margin_steps", a.margin >= 0 ? a.margin : config.horizon},
        {"rollouts", a.rollouts},
        {"p_collapse", a.p_collapse},
        {"baseline", a.baseline},
        {"gamma", a.gamma},
        {"config", ToJson(config)}}},
      {"environments", per_env},
      {"aggregate", ToJson(summary)}};
  WriteText(fs::path(a.out) / "report.json", report.dump(2) + "\n");
  WriteText(fs::path(a.out) / "confusion_raw.csv", summary.raw.ToCsv(true));
  WriteText(fs::path(a.out) / "confusion_filtered.csv", summary.filtered.ToCsv(true));
  WriteText(fs::path(a.out) / "counts_raw.csv", summary.raw.ToCsv(false));
  WriteText(fs::path(a.out) / "counts_filtered.csv", summary.filtered.ToCsv(false));

  out << "raw confusion (rows actual, columns estimated)\n"
      << summary.raw.ToCsv(true) << "filtered confusion\n"
      << summary.filtered.ToCsv(true) << "discrete detection "
      << summary.junctions_detected << "/" << summary.junctions_seen << " = "
      << Percent(summary.DetectionRate()) << "\n"
      << "estimation p99 " << summary.timing.p99 * 1e3 << " ms\n";
  if (summary.baseline) {
    out << "uateleop (gamma " << a.gamma << "): human on teleop steps "
        << Percent(summary.baseline->filtered.HumanOnTeleop())
        << ", robot on certain steps "
        << Percent(summary.baseline->filtered.RobotOnCertain()) << "\n";
  }
  out << "report written to " << (fs::path(a.out) / "report.json").string() << "\n";
  return summary.failures == 0 ? 0 : 1;
}

struct ServeArgs {
  std::string env;
  std::string config;
  std::string bind = "127.0.0.1:8080";
  std::string static_dir;
  std::string log_dir = ".";
  std::uint64_t seed = 0;
  double hz = 10.0;
  int max_cycles = 5000;
  int rollouts = 50;
  double p_collapse = 0.0;
};

int CmdServe(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  const Environment env = LoadEnvironmentFile(a.env);
  const ArbiterConfig config = LoadConfigOrDefault(a.config);
  if (!config.ranges.empty()) {
    const ConfigReport report = ValidateConfig(config);
    if (!report.ok()) {
      err << "refusing to start:\n" << report.Describe();
      return 2;
    }
  } else {
    // Ranges are derived later; check the ordering with placeholder ranges.
    ArbiterConfig probe = config;
    probe.ranges = ActionRanges({{0.0, 1.0}, {0.0, 1.0}});
    const ConfigReport report = ValidateConfig(probe);
    if (!report.ok()) {
      err << "refusing to start:\n" << report.Describe();
      return 2;
    }
  }
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw CliError("--bind needs host:port");
  ServerOptions options;
  options.address = a.bind.substr(0, colon);
  try {
    options.port = static_cast<unsigned short>(std::stoi(a.bind.substr(colon + 1)));
  } catch (const std::exception&) {
    throw CliError("bad port in --bind " + a.bind);
  }
  if (!a.static_dir.empty()) options.static_dir = a.static_dir;
  options.control_hz = a.hz;
  options.handle_signals = true;

  SessionSettings settings;
  settings.seed = a.seed;
  settings.max_cycles = a.max_cycles;
  settings.sampler.rollouts = a.rollouts;
  settings.sampler.p_collapse = a.p_collapse;
  EnsureDirectory(a.log_dir);
  const std::string log_path =
      (fs::path(a.log_dir) / SessionLogFileName(a.seed)).string();
  auto session = std::make_unique<Session>(env, config, settings, log_path);
  PlaygroundServer server(std::move(session), options);
  server.Start();
  const std::string url = server.Url();
  out << "serving " << url << " (websocket at ws://" << url.substr(7)
      << "ws)\nsession log " << log_path << std::endl;
  server.Run();
  out << "session log flushed to " << log_path << std::endl;
  return 0;
}

struct ReplayArgs {
  std::string log;
  std::optional<std::uint64_t> seed;
};

int CmdReplay(const ReplayArgs& a, std::ostream& out) {
  if (!fs::exists(a.log)) throw CliError("session log not found: " + a.log);
  SessionLog log = LoadSessionLog(a.log);
  if (a.seed) log.header["settings"]["seed"] = *a.seed;
  const ReplayResult result = ReplaySession(log);
  out << "replayed " << result.replayed.records.size() << " of "
      << log.records.size() << " records: "
      << (result.identical ? "identical" : "diverged at record " +
                                               std::to_string(result.first_mismatch))
      << "\ninput metric " << InputMetric(result.replayed) << "\n";
  return result.identical ? 0 : 1;
}

struct ExportArgs {
  std::string env;
  std::string out;
  std::uint64_t seed = 0;
  int index = 0;
};

int CmdExportTraj(const ExportArgs& a, std::ostream& out) {
  const Environment env = LoadEnvironmentFile(a.env);
  const GroundTruthSampler sampler(env);
  const auto path = sampler.SampleTrajectory(DemonstrationSeed(a.seed, a.index));
  std::ostringstream csv;
  csv << std::setprecision(17) << "t,x,y\n";
  for (std::size_t t = 0; t < path.size(); ++t) {
    csv << t << ',' << path[t].x() << ',' << path[t].y() << '\n';
  }
  WriteText(a.out, csv.str());
  out << "wrote " << path.size() << " steps to " << a.out << "\n";
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Assistance arbitration from rollout uncertainty", "realm"};
  app.require_subcommand(1);

  GenEnvArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-env", "Generate benchmark environments");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--count", gen.count, "Number of environments")
      ->check(CLI::Range(1, 1000000));
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--teleop", gen.teleop, "Teleoperation segments per env")
      ->check(CLI::Range(0, 100));
  gen_cmd->add_option("--corrective", gen.corrective, "Corrective segments per env")
      ->check(CLI::Range(0, 100));
  gen_cmd->add_option("--junctions", gen.junctions, "Junctions per env")
      ->check(CLI::Range(0, 100));
  gen_cmd->add_option("--min-gap", gen.min_gap, "Certain steps between segments")
      ->check(CLI::Range(0, 1000));

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score the arbiter against ground truth");
  eval_cmd->add_option("--env,envs", eval.envs, "Environment files")->required();
  eval_cmd->add_option("--config", eval.config, "Arbiter config file");
  eval_cmd->add_option("--out", eval.out, "Report directory");
  eval_cmd->add_option("--seed", eval.seed, "Master seed");
  eval_cmd->add_option("--n-test", eval.n_test, "Test trajectories per env")
      ->check(CLI::Range(1, 100000));
  eval_cmd->add_option("--training", eval.training,
                       "Demonstrations used to derive action ranges")
      ->check(CLI::Range(1, 1000000));
  eval_cmd->add_option("--margin", eval.margin,
                       "Steps excluded around label changes (default: horizon)")
      ->check(CLI::Range(0, 1000));
  eval_cmd->add_option("--rollouts", eval.rollouts, "Rollouts per forecast")
      ->check(CLI::Range(2, 100000));
  eval_cmd->add_option("--p-collapse", eval.p_collapse, "Junction mode-collapse probability")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_flag("--baseline", eval.baseline, "Also score the variance-gated baseline");
  eval_cmd->add_option("--gamma", eval.gamma, "Baseline variance threshold")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--threads", eval.threads, "Worker threads (0: all cores)")
      ->check(CLI::Range(0, 1024));

  ServeArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the interactive playground");
  serve_cmd->add_option("--env", serve.env, "Environment file")->required();
  serve_cmd->add_option("--config", serve.config, "Arbiter config file");
  serve_cmd->add_option("--bind", serve.bind, "host:port");
  serve_cmd->add_option("--static", serve.static_dir, "Directory of client assets");
  serve_cmd->add_option("--log-dir", serve.log_dir, "Where session logs go");
  serve_cmd->add_option("--seed", serve.seed, "Session seed");
  serve_cmd->add_option("--hz", serve.hz, "Control rate")->check(CLI::Range(0.1, 1000.0));
  serve_cmd->add_option("--max-cycles", serve.max_cycles, "Cycle limit")
      ->check(CLI::Range(1, 10000000));
  serve_cmd->add_option("--rollouts", serve.rollouts, "Rollouts per forecast")
      ->check(CLI::Range(2, 100000));
  serve_cmd->add_option("--p-collapse", serve.p_collapse, "Junction mode-collapse probability")
      ->check(CLI::Range(0.0, 1.0));

  ReplayArgs replay;
  std::uint64_t replay_seed = 0;
  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a logged session");
  replay_cmd->add_option("--log,log", replay.log, "Session log")->required();
  CLI::Option* replay_seed_opt =
      replay_cmd->add_option("--seed", replay_seed, "Override the logged seed");

  ExportArgs exp;
  CLI::App* export_cmd = app.add_subcommand("export-traj", "Write a demonstration as CSV");
  export_cmd->add_option("--env", exp.env, "Environment file")->required();
  export_cmd->add_option("--out", exp.out, "CSV path")->required();
  export_cmd->add_option("--seed", exp.seed, "Demonstration seed");
  export_cmd->add_option("--index", exp.index, "Demonstration index")
      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen_cmd) return CmdGenEnv(gen, out);
    if (*eval_cmd) return CmdEval(eval, out);
    if (*serve_cmd) return CmdServe(serve, out, err);
    if (*replay_cmd) {
      if (*replay_seed_opt) replay.seed = replay_seed;
      return CmdReplay(replay, out);
    }
    if (*export_cmd) return CmdExportTraj(exp, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace realm
