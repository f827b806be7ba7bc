#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "amp/bench.h"
#include "amp/error.h"
#include "amp/exact_mlp.h"
#include "amp/generators.h"
#include "amp/id_protocol.h"
#include "amp/rng.h"
#include "amp/synchronizer.h"
#include "amp/trace_io.h"
#include "amp/train.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void emit(const char* key, const ordered_json& value) {
  ordered_json line;
  line[key] = value;
  std::cout << line.dump() << std::endl;
}

void fail_line(const std::string& kind, const std::string& message) {
  ordered_json e{{"error", kind}, {"message", message}};
  std::cerr << e.dump() << std::endl;
}

std::string results_dir() {
  const char* env = std::getenv("AMP_RESULTS_DIR");
  std::string dir = env && *env ? env : "results";
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw amp::InvalidArgument("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw amp::ParseError(path, 1, e.what());
  }
}

struct Options {
  int jobs = 1;

  // verify-sim
  int graphs = 50;
  int max_n = 12;
  int layers = 3;
  int max_degree = 5;
  std::string delay = "both";
  std::string trace_out;

  // verify-mlp
  int samples = 10000;

  // id-assign
  int k = 4;
  int trials = 1000;
  int surrender_trials = 0;
  bool general = false;
  int n = 20;

  // train / eval
  std::string task = "parity";
  std::string model_path;
  std::string experiment_path;
  std::string out;
  std::string ckpt;
  std::string data_dir;
  std::vector<int> sizes;
  int iterations = -1;
  int tasks = 1;
  bool extended_sizes = false;

  // inspect
  std::string trace_in;
  int limit = -1;

  std::uint64_t seed = 0;
};

int cmd_verify_sim(const Options& o) {
  ordered_json cfg{{"command", "verify-sim"}, {"graphs", o.graphs},     {"max_n", o.max_n},
                   {"layers", o.layers},      {"max_degree", o.max_degree}, {"delay", o.delay},
                   {"seed", o.seed}};
  emit("config", cfg);
  std::vector<std::pair<std::string, amp::DelayModel>> modes;
  if (o.delay == "constant" || o.delay == "both") modes.emplace_back("constant", amp::DelayModel::constant(1.0));
  if (o.delay == "uniform" || o.delay == "both") modes.emplace_back("uniform", amp::DelayModel::uniform(0.0, 1.0, 0));
  bool ok = true;
  ordered_json report = ordered_json::array();
  for (const auto& [name, dm] : modes) {
    const auto r = amp::verify_simulation(o.graphs, o.max_n, o.layers, o.seed, dm, o.max_degree);
    const bool pass = r.failures == 0 && r.max_deviation < 1e-9;
    ok = ok && pass;
    report.push_back({{"delay", name},
                      {"graphs", r.graphs},
                      {"runs", r.runs},
                      {"failures", r.failures},
                      {"max_deviation", r.max_deviation},
                      {"pass", pass}});
  }
  emit("report", report);
  if (!o.trace_out.empty()) {
    const amp::Graph g = amp::generate_bounded_degree_graph(std::min(o.max_n, 6), o.max_degree, 1,
                                                            amp::derive_seed(o.seed, 7));
    amp::Trace<amp::SimState, amp::SimMessage> trace;
    amp::simulate_sgin(g, amp::random_sgin_model(1, o.layers, o.seed), 0,
                       amp::DelayModel::constant(1.0), amp::OriginMode::kCorrected, true, &trace);
    std::ofstream out(o.trace_out);
    if (!out) throw amp::InvalidArgument("cannot write " + o.trace_out);
    amp::write_trace_jsonl(out, trace);
  }
  return ok ? kExitOk : kExitFailed;
}

int cmd_verify_mlp(const Options& o) {
  emit("config", {{"command", "verify-mlp"}, {"samples", o.samples}, {"seed", o.seed}});
  const auto r = amp::verify_exact_mlp(o.samples, o.seed);
  const bool pass = r.branch_mismatches == 0 && r.max_abs_error <= 1e-12;
  emit("report", {{"samples", r.samples},
                  {"branch_mismatches", r.branch_mismatches},
                  {"max_abs_error", r.max_abs_error},
                  {"pass", pass}});
  return pass ? kExitOk : kExitFailed;
}

int cmd_id_assign(const Options& o) {
  ordered_json cfg{{"command", "id-assign"}, {"k", o.k},   {"trials", o.trials},
                   {"surrender_trials", o.surrender_trials}, {"general", o.general},
                   {"seed", o.seed}};
  if (o.general) cfg["n"] = o.n;
  emit("config", cfg);
  if (!o.general) {
    const auto r = amp::id_monte_carlo(o.k, o.trials, o.seed, o.surrender_trials);
    emit("report", r.to_json());
    return r.uniqueness_failures == 0 ? kExitOk : kExitFailed;
  }
  int failures = 0;
  for (int t = 0; t < o.trials; ++t) {
    const std::uint64_t s = amp::derive_seed(o.seed, static_cast<std::uint64_t>(t));
    const auto g = amp::generate_spanning_tree_graph(o.n, s);
    if (!amp::is_bijection(amp::assign_ids_general(g, amp::derive_seed(s, 1)))) ++failures;
  }
  emit("report", {{"n", o.n}, {"trials", o.trials}, {"uniqueness_failures", failures}});
  return failures == 0 ? kExitOk : kExitFailed;
}

amp::AmpCellConfig load_model_config(const Options& o) {
  if (o.model_path.empty()) return {};
  return amp::AmpCellConfig::from_json(read_json_file(o.model_path));
}

amp::ExperimentConfig experiment_config(const Options& o) {
  amp::ExperimentConfig cfg;
  if (!o.experiment_path.empty()) cfg = amp::ExperimentConfig::from_json(read_json_file(o.experiment_path));
  if (!o.model_path.empty()) cfg.model = load_model_config(o);
  if (o.iterations >= 0) cfg.iterations = o.iterations;
  if (o.tasks > 1) cfg.tasks = o.tasks;
  cfg.task = o.tasks > 1 ? "parity-multitask" : "parity";
  cfg.seeds = {o.seed};
  if (o.extended_sizes) cfg.test_sizes = amp::extended_test_sizes();
  if (!o.sizes.empty()) cfg.test_sizes = o.sizes;
  cfg.validate();
  return cfg;
}

std::vector<amp::TaskSample> tu_samples(const std::string& dir) {
  std::vector<amp::TaskSample> out;
  for (const auto& inst : amp::load_tu_dataset(dir)) out.push_back(amp::to_task_sample(inst));
  return out;
}

amp::TaskShape tu_shape(const std::vector<amp::TaskSample>& samples) {
  amp::TaskShape shape;
  shape.input_width = samples.at(0).graph.feature_width();
  int classes = 2;
  for (const auto& s : samples) classes = std::max(classes, s.graph_label + 1);
  shape.num_classes = classes;
  return shape;
}

void write_history(const std::string& path, const amp::TrainHistory& h) {
  std::ofstream out(path);
  if (!out) throw amp::InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "schema_version,iteration,loss,accuracy,grad_norm\n";
  for (const auto& m : h.iterations) {
    out << amp::kResultsSchemaVersion << ',' << m.iteration << ',' << m.loss << ',' << m.accuracy
        << ',' << m.grad_norm << '\n';
  }
}

void save_checkpoint(const std::string& path, const amp::AmpModel& model, ordered_json training) {
  nlohmann::json j = model.checkpoint();
  j["training"] = nlohmann::json::parse(training.dump());
  std::ofstream out(path);
  if (!out) throw amp::InvalidArgument("cannot write checkpoint " + path);
  out << j.dump() << '\n';
}

int cmd_train(const Options& o) {
  if (o.out.empty()) throw amp::InvalidArgument("--out is required");
  const std::string dir = results_dir();
  amp::TrainHistory history;
  ordered_json report;
  if (o.task == "parity") {
    const auto cfg = experiment_config(o);
    emit("config", {{"command", "train"}, {"experiment", cfg.to_json()}, {"out", o.out}, {"results_dir", dir}});
    const auto model = amp::train_parity_model(cfg, o.seed, &history);
    const int tmd = amp::max_start_distance(amp::parity_train_set(cfg, o.seed));
    ordered_json meta{{"task", "parity"}, {"seed", o.seed}, {"experiment", cfg.to_json()},
                      {"train_max_distance", tmd}};
    save_checkpoint(o.out, model, meta);
    report = {{"final_loss", history.iterations.empty() ? 0.0 : history.iterations.back().loss},
              {"train_accuracy", history.iterations.empty() ? 0.0 : history.iterations.back().accuracy}};
  } else if (o.task == "cycle-pair") {
    auto mc = load_model_config(o);
    const int iters = o.iterations >= 0 ? o.iterations : 300;
    emit("config", {{"command", "train"}, {"task", o.task}, {"model", mc.to_json()},
                    {"iterations", iters}, {"seed", o.seed}, {"out", o.out}});
    amp::AmpModel model(mc, amp::TaskShape{});
    const auto r = amp::run_cycle_pair(mc, iters, 0.01, 3, o.seed, &model);
    save_checkpoint(o.out, model, {{"task", "cycle-pair"}, {"seed", o.seed}});
    report = {{"final_loss", r.final_loss}, {"train_accuracy", r.train_accuracy},
              {"test_accuracy", r.test_accuracy}};
  } else if (o.task == "tu") {
    if (o.data_dir.empty()) throw amp::InvalidArgument("--data is required for task tu");
    auto mc = load_model_config(o);
    mc.seed = amp::derive_seed(o.seed, 3);
    const auto samples = tu_samples(o.data_dir);
    amp::TrainConfig tc;
    tc.iterations = o.iterations >= 0 ? o.iterations : 100;
    tc.seed = amp::derive_seed(o.seed, 4);
    emit("config", {{"command", "train"}, {"task", o.task}, {"data", o.data_dir},
                    {"model", mc.to_json()}, {"iterations", tc.iterations}, {"seed", o.seed}});
    amp::AmpModel model(mc, tu_shape(samples));
    history = amp::train(model, samples, tc);
    save_checkpoint(o.out, model, {{"task", "tu"}, {"seed", o.seed}});
    report = {{"final_loss", history.iterations.empty() ? 0.0 : history.iterations.back().loss},
              {"train_accuracy", history.iterations.empty() ? 0.0 : history.iterations.back().accuracy}};
  } else {
    throw amp::InvalidArgument("unknown task `" + o.task + "`");
  }
  if (!history.iterations.empty()) write_history((fs::path(dir) / "train_history.csv").string(), history);
  emit("report", report);
  return kExitOk;
}

int cmd_eval(const Options& o) {
  if (o.ckpt.empty()) throw amp::InvalidArgument("--ckpt is required");
  const nlohmann::json j = read_json_file(o.ckpt);
  const amp::AmpModel model = amp::AmpModel::from_checkpoint(j);
  const std::string dir = results_dir();
  if (o.task == "parity") {
    const auto& meta = j.at("training");
    amp::ExperimentConfig cfg = amp::ExperimentConfig::from_json(meta.at("experiment"));
    cfg.model = model.config();
    if (o.extended_sizes) cfg.test_sizes = amp::extended_test_sizes();
    if (!o.sizes.empty()) cfg.test_sizes = o.sizes;
    cfg.validate();
    const std::uint64_t seed = meta.at("seed").get<std::uint64_t>();
    emit("config", {{"command", "eval"}, {"ckpt", o.ckpt}, {"experiment", cfg.to_json()},
                    {"jobs", o.jobs}, {"results_dir", dir}});
    amp::MetricsReport rep;
    rep.task = cfg.task;
    amp::SeedReport sr;
    sr.seed = seed;
    sr.train_max_distance = meta.at("train_max_distance").get<int>();
    for (int size : cfg.test_sizes) {
      sr.sizes.push_back(amp::evaluate_parity_size(model, cfg, seed, size, sr.train_max_distance, o.jobs));
    }
    rep.seeds.push_back(sr);
    amp::write_results_csv((fs::path(dir) / "eval.csv").string(), rep);
    amp::write_json((fs::path(dir) / "eval.json").string(), rep.to_json());
    emit("report", rep.to_json()["summary"]);
    return kExitOk;
  }
  if (o.task == "tu") {
    if (o.data_dir.empty()) throw amp::InvalidArgument("--data is required for task tu");
    emit("config", {{"command", "eval"}, {"ckpt", o.ckpt}, {"task", o.task}, {"data", o.data_dir}});
    const auto samples = tu_samples(o.data_dir);
    const double acc = amp::accuracy(amp::predict(model, samples, {}, o.seed, o.jobs));
    const ordered_json rep{{"schema_version", amp::kResultsSchemaVersion}, {"task", "tu"}, {"accuracy", acc}};
    amp::write_json((fs::path(dir) / "eval.json").string(), rep);
    emit("report", rep);
    return kExitOk;
  }
  throw amp::InvalidArgument("unknown task `" + o.task + "`");
}

std::string compact(const ordered_json& j) {
  if (j.is_null()) return "-";
  return j.dump();
}

int cmd_inspect(const Options& o) {
  std::ifstream in(o.trace_in);
  if (!in) throw amp::InvalidArgument("cannot read " + o.trace_in);
  std::string line;
  long long no = 0;
  int shown = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    if (o.limit >= 0 && shown >= o.limit) break;
    ordered_json step;
    try {
      step = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw amp::ParseError(o.trace_in, no, e.what());
    }
    try {
      const auto& msg = step.at("message");
      std::ostringstream s;
      s << '#' << shown << " t=" << step.at("arrival_time").get<double>() << " node "
        << step.at("receiver").get<int>() << " <- "
        << (msg.at("sender").is_null() ? std::string("init") : std::to_string(msg.at("sender").get<int>()))
        << " payload=" << compact(msg.at("payload")) << " bits=" << compact(msg.at("protocol_bits"))
        << "\n    state " << compact(step.at("state_before")) << "\n       -> "
        << compact(step.at("state_after")) << "\n    emit " << compact(step.at("emitted_payload"));
      std::cout << s.str() << '\n';
    } catch (const nlohmann::json::exception& e) {
      throw amp::ParseError(o.trace_in, no, e.what());
    }
    ++shown;
  }
  return kExitOk;
}

int exit_code_for(amp::ErrorKind kind) {
  switch (kind) {
    case amp::ErrorKind::kInvalidArgument:
    case amp::ErrorKind::kParseError:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous message passing toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--jobs", o.jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);

  auto* vs = app.add_subcommand("verify-sim", "Synchronizer vs synchronous sGIN equivalence suite");
  vs->add_option("--graphs", o.graphs)->check(CLI::NonNegativeNumber);
  vs->add_option("--max-n", o.max_n)->check(CLI::Range(2, 1000));
  vs->add_option("--layers", o.layers)->check(CLI::Range(1, 64));
  vs->add_option("--max-degree", o.max_degree)->check(CLI::Range(2, 64));
  vs->add_option("--delay", o.delay)->check(CLI::IsMember({"constant", "uniform", "both"}));
  vs->add_option("--trace", o.trace_out, "Write the JSONL trace of a small example run");
  vs->add_option("--seed", o.seed)->required();

  auto* vm = app.add_subcommand("verify-mlp", "Exact transition network vs direct transition");
  vm->add_option("--samples", o.samples)->check(CLI::NonNegativeNumber);
  vm->add_option("--seed", o.seed, "Sampling seed");

  auto* id = app.add_subcommand("id-assign", "Identifier assignment Monte Carlo");
  id->add_option("--k", o.k)->check(CLI::Range(1, 64));
  id->add_option("--trials", o.trials)->check(CLI::NonNegativeNumber);
  id->add_option("--surrender-trials", o.surrender_trials)->check(CLI::NonNegativeNumber);
  id->add_flag("--general", o.general, "Assign on random general graphs");
  id->add_option("--n", o.n)->check(CLI::Range(1, 100000));
  id->add_option("--seed", o.seed)->required();

  auto* tr = app.add_subcommand("train", "Train a model and write a checkpoint");
  tr->add_option("--task", o.task)->check(CLI::IsMember({"parity", "cycle-pair", "tu"}));
  tr->add_option("--model", o.model_path, "Model config JSON")->check(CLI::ExistingFile);
  tr->add_option("--experiment", o.experiment_path, "Experiment config JSON")->check(CLI::ExistingFile);
  tr->add_option("--data", o.data_dir, "TU dataset directory")->check(CLI::ExistingDirectory);
  tr->add_option("--out", o.out, "Checkpoint path")->required();
  tr->add_option("--iterations", o.iterations)->check(CLI::NonNegativeNumber);
  tr->add_option("--tasks", o.tasks, "Simultaneous parity tasks")->check(CLI::Range(1, 16));
  tr->add_option("--seed", o.seed)->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--task", o.task)->check(CLI::IsMember({"parity", "tu"}));
  ev->add_option("--ckpt", o.ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--sizes", o.sizes)->delimiter(',');
  ev->add_flag("--extended-sizes", o.extended_sizes, "Use the long list of test sizes");
  ev->add_option("--data", o.data_dir)->check(CLI::ExistingDirectory);
  ev->add_option("--seed", o.seed, "Delay seed for uniform-delay evaluation");

  auto* in = app.add_subcommand("inspect", "Human-readable replay of a JSONL trace");
  in->add_option("--trace", o.trace_in)->required()->check(CLI::ExistingFile);
  in->add_option("--limit", o.limit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*vs) return cmd_verify_sim(o);
    if (*vm) return cmd_verify_mlp(o);
    if (*id) return cmd_id_assign(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*in) return cmd_inspect(o);
  } catch (const amp::Error& e) {
    fail_line(amp::to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    fail_line("parse-error", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fail_line("internal", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
