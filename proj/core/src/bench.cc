#include "amp/bench.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "amp/error.h"
#include "amp/generators.h"
#include "amp/rng.h"

namespace amp {

std::vector<int> parity_labels(const Graph& g, NodeId start) {
  auto dist = bfs_distances(g, start);
  std::vector<int> out(dist.size());
  for (std::size_t v = 0; v < dist.size(); ++v) out[v] = dist[v] < 0 ? -1 : dist[v] % 2;
  return out;
}

std::vector<TaskSample> parity_samples(int n, int count, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("parity task needs at least one start");
  if (n < k) throw InvalidArgument("graphs with n < k cannot host k distinct starts");
  std::vector<TaskSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t gseed = derive_seed(seed, static_cast<std::uint64_t>(i));
    TaskSample s;
    s.graph = generate_spanning_tree_graph(n, gseed);
    s.mode = TaskMode::kMarked;
    std::vector<NodeId> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::mt19937_64 rng(derive_seed(gseed, 1));
    std::shuffle(nodes.begin(), nodes.end(), rng);
    s.starts.assign(nodes.begin(), nodes.begin() + k);
    for (NodeId st : s.starts) s.node_labels.push_back(parity_labels(s.graph, st));
    out.push_back(std::move(s));
  }
  return out;
}

TaskSample to_task_sample(const DatasetInstance& inst) {
  inst.validate();
  TaskSample s;
  s.graph = inst.graph;
  switch (inst.task_kind) {
    case TaskKind::kGraphClassification:
      s.mode = TaskMode::kGraph;
      s.graph_label = *inst.graph.graph_label();
      break;
    case TaskKind::kNodeClassification:
    case TaskKind::kMultiStartNodeClassification:
      s.node_labels.push_back(*inst.graph.node_labels());
      if (inst.start_marks.empty()) {
        s.mode = TaskMode::kPerStart;
      } else {
        s.mode = TaskMode::kMarked;
        s.starts = inst.start_marks;
      }
      break;
  }
  return s;
}

std::vector<BucketAccuracy> underreaching_breakdown(const std::vector<NodePrediction>& predictions,
                                                    const std::vector<int>& distances) {
  if (predictions.size() != distances.size()) {
    throw InvalidArgument("predictions and distances differ in length");
  }
  int max_d = -1;
  for (int d : distances) {
    if (d < 0) throw InvalidArgument("distances must be finite");
    max_d = std::max(max_d, d);
  }
  std::vector<BucketAccuracy> out(max_d < 0 ? 0 : max_d / 2 + 1);
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].lo = static_cast<int>(2 * b);
    out[b].hi = static_cast<int>(2 * b + 1);
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto& b = out[distances[i] / 2];
    ++b.total;
    b.correct += predictions[i].label == predictions[i].predicted;
  }
  return out;
}

double oversmoothing_restricted(const std::vector<NodePrediction>& predictions,
                                const std::vector<int>& distances, int train_max_distance) {
  if (predictions.size() != distances.size()) {
    throw InvalidArgument("predictions and distances differ in length");
  }
  long long total = 0;
  long long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (distances[i] < 0 || distances[i] > train_max_distance) continue;
    ++total;
    correct += predictions[i].label == predictions[i].predicted;
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

std::vector<int> prediction_distances(const std::vector<TaskSample>& samples,
                                      const std::vector<NodePrediction>& predictions) {
  std::map<std::pair<int, int>, std::vector<int>> cache;
  std::vector<int> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    const auto& s = samples.at(p.sample);
    if (s.mode != TaskMode::kMarked || p.node < 0) {
      throw InvalidArgument("distances need node predictions of a marked task");
    }
    auto key = std::make_pair(p.sample, p.head);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, bfs_distances(s.graph, s.starts.at(p.head))).first;
    }
    out.push_back(it->second[p.node]);
  }
  return out;
}

int max_start_distance(const std::vector<TaskSample>& samples) {
  int m = 0;
  for (const auto& s : samples) {
    for (NodeId st : s.starts) {
      for (int d : bfs_distances(s.graph, st)) m = std::max(m, d);
    }
  }
  return m;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  if (train_n < 1 || train_graphs < 1 || test_graphs < 1) {
    throw InvalidArgument("graph sizes and counts must be positive");
  }
  if (test_sizes.empty()) throw InvalidArgument("at least one test size is required");
  for (int s : test_sizes) {
    if (s < tasks) throw InvalidArgument("test size smaller than the number of tasks");
  }
  if (train_n < tasks) throw InvalidArgument("train size smaller than the number of tasks");
  if (iterations < 0 || lr < 0) throw InvalidArgument("iterations and lr must be >= 0");
  if (budget_per_node < 1 || halting_cap_per_node < 1) {
    throw InvalidArgument("budgets must be positive");
  }
  if (tasks < 1) throw InvalidArgument("tasks must be >= 1");
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["model"] = model.to_json();
  j["seeds"] = seeds;
  j["train_n"] = train_n;
  j["train_graphs"] = train_graphs;
  j["test_sizes"] = test_sizes;
  j["test_graphs"] = test_graphs;
  j["iterations"] = iterations;
  j["lr"] = lr;
  j["budget_per_node"] = budget_per_node;
  j["halting_cap_per_node"] = halting_cap_per_node;
  j["uniform_delays"] = uniform_delays;
  j["tasks"] = tasks;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.task = j.value("task", c.task);
    if (j.contains("model")) c.model = AmpCellConfig::from_json(j["model"]);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.train_n = j.value("train_n", c.train_n);
    c.train_graphs = j.value("train_graphs", c.train_graphs);
    if (j.contains("test_sizes")) c.test_sizes = j["test_sizes"].get<std::vector<int>>();
    c.test_graphs = j.value("test_graphs", c.test_graphs);
    c.iterations = j.value("iterations", c.iterations);
    c.lr = j.value("lr", c.lr);
    c.budget_per_node = j.value("budget_per_node", c.budget_per_node);
    c.halting_cap_per_node = j.value("halting_cap_per_node", c.halting_cap_per_node);
    c.uniform_delays = j.value("uniform_delays", c.uniform_delays);
    c.tasks = j.value("tasks", c.tasks);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

RunSettings ExperimentConfig::run_settings() const {
  RunSettings r;
  r.delay = uniform_delays ? DelayModel::uniform(0.0, 1.0, 0) : DelayModel::constant(1.0);
  r.budget_per_node = budget_per_node;
  r.halting_cap_per_node = halting_cap_per_node;
  return r;
}

std::vector<int> default_test_sizes() { return {10, 25, 50}; }
std::vector<int> extended_test_sizes() { return {10, 15, 25, 50, 100, 250, 500, 1000, 2500}; }

double SizeReport::bucket_weighted_accuracy() const {
  long long total = 0;
  double acc = 0.0;
  for (const auto& b : buckets) {
    acc += b.accuracy() * static_cast<double>(b.total);
    total += b.total;
  }
  return total ? acc / static_cast<double>(total) : 0.0;
}

std::pair<double, double> MetricsReport::accuracy_stats(int size) const {
  std::vector<double> xs;
  for (const auto& s : seeds) {
    for (const auto& r : s.sizes) {
      if (r.size == size) xs.push_back(r.accuracy);
    }
  }
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / xs.size())};
}

double MetricsReport::median_accuracy(int size) const {
  std::vector<double> xs;
  for (const auto& s : seeds) {
    for (const auto& r : s.sizes) {
      if (r.size == size) xs.push_back(r.accuracy);
    }
  }
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["task"] = task;
  std::vector<int> sizes;
  for (const auto& s : seeds) {
    for (const auto& r : s.sizes) {
      if (std::find(sizes.begin(), sizes.end(), r.size) == sizes.end()) sizes.push_back(r.size);
    }
  }
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (int size : sizes) {
    auto [mean, sd] = accuracy_stats(size);
    summary.push_back({{"size", size}, {"mean", mean}, {"std", sd}, {"median", median_accuracy(size)}});
  }
  j["summary"] = summary;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& s : seeds) {
    nlohmann::ordered_json rs;
    rs["seed"] = s.seed;
    rs["final_loss"] = s.final_loss;
    rs["train_accuracy"] = s.train_accuracy;
    rs["train_max_distance"] = s.train_max_distance;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& r : s.sizes) {
      nlohmann::ordered_json b = nlohmann::ordered_json::array();
      for (const auto& bk : r.buckets) {
        b.push_back({{"bucket", std::to_string(bk.lo) + "-" + std::to_string(bk.hi)},
                     {"correct", bk.correct},
                     {"total", bk.total},
                     {"accuracy", bk.accuracy()}});
      }
      per.push_back({{"size", r.size},
                     {"accuracy", r.accuracy},
                     {"predictions", r.predictions},
                     {"restricted_accuracy", r.restricted_accuracy},
                     {"buckets", b}});
    }
    rs["sizes"] = per;
    runs.push_back(rs);
  }
  j["runs"] = runs;
  return j;
}

std::vector<TaskSample> parity_train_set(const ExperimentConfig& cfg, std::uint64_t seed) {
  return parity_samples(cfg.train_n, cfg.train_graphs, cfg.tasks, derive_seed(seed, 1));
}

std::vector<TaskSample> parity_test_set(const ExperimentConfig& cfg, std::uint64_t seed, int size) {
  const std::uint64_t stream = derive_seed(derive_seed(seed, 2), static_cast<std::uint64_t>(size));
  return parity_samples(size, cfg.test_graphs, cfg.tasks, stream);
}

AmpModel train_parity_model(const ExperimentConfig& cfg, std::uint64_t seed, TrainHistory* history,
                            const std::function<void(const IterationMetrics&)>& on_iteration) {
  cfg.validate();
  AmpCellConfig mc = cfg.model;
  mc.seed = derive_seed(seed, 3);
  TaskShape shape;
  shape.input_width = 1;
  shape.origin_channels = cfg.tasks;
  shape.num_classes = 2;
  shape.num_heads = cfg.tasks;
  AmpModel model(mc, shape);
  TrainConfig tc;
  tc.iterations = cfg.iterations;
  tc.adam.lr = cfg.lr;
  tc.seed = derive_seed(seed, 4);
  tc.run = cfg.run_settings();
  auto h = train(model, parity_train_set(cfg, seed), tc, on_iteration);
  if (history) *history = std::move(h);
  return model;
}

SizeReport evaluate_parity_size(const AmpModel& model, const ExperimentConfig& cfg,
                                std::uint64_t seed, int size, int train_max_distance, int jobs) {
  const auto test_set = parity_test_set(cfg, seed, size);
  const auto preds =
      predict(model, test_set, cfg.run_settings(), derive_seed(derive_seed(seed, 5), size), jobs);
  const auto dist = prediction_distances(test_set, preds);
  SizeReport sr;
  sr.size = size;
  sr.accuracy = accuracy(preds);
  sr.predictions = static_cast<long long>(preds.size());
  sr.buckets = underreaching_breakdown(preds, dist);
  sr.restricted_accuracy = oversmoothing_restricted(preds, dist, train_max_distance);
  return sr;
}

SeedReport run_parity_seed(const ExperimentConfig& cfg, std::uint64_t seed, int jobs) {
  TrainHistory history;
  const AmpModel model = train_parity_model(cfg, seed, &history);
  SeedReport rep;
  rep.seed = seed;
  rep.train_max_distance = max_start_distance(parity_train_set(cfg, seed));
  if (!history.iterations.empty()) {
    rep.final_loss = history.iterations.back().loss;
    rep.train_accuracy = history.iterations.back().accuracy;
  }
  for (int size : cfg.test_sizes) {
    rep.sizes.push_back(evaluate_parity_size(model, cfg, seed, size, rep.train_max_distance, jobs));
  }
  return rep;
}

MetricsReport run_parity_experiment(const ExperimentConfig& cfg, int jobs) {
  MetricsReport rep;
  rep.task = cfg.task;
  for (std::uint64_t s : cfg.seeds) rep.seeds.push_back(run_parity_seed(cfg, s, jobs));
  return rep;
}

nlohmann::ordered_json OversquashingReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["k"] = k;
  j["single_task"] = single_task.to_json();
  j["multi_task"] = multi_task.to_json();
  return j;
}

OversquashingReport oversquashing_multitask(const ExperimentConfig& cfg, int k, int jobs) {
  OversquashingReport rep;
  rep.k = k;
  ExperimentConfig single = cfg;
  single.tasks = 1;
  single.task = "parity";
  ExperimentConfig multi = cfg;
  multi.tasks = k;
  multi.task = "parity-multitask";
  multi.validate();
  rep.single_task = run_parity_experiment(single, jobs);
  rep.multi_task = run_parity_experiment(multi, jobs);
  return rep;
}

namespace {

Graph random_relabeling(const Graph& g, std::mt19937_64& rng) {
  std::vector<NodeId> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return g.permuted(perm);
}

TaskSample per_start_sample(const Graph& g) {
  TaskSample s;
  s.graph = g;
  s.mode = TaskMode::kPerStart;
  s.node_labels.push_back(*g.node_labels());
  return s;
}

}  // namespace

CyclePairResult run_cycle_pair(const AmpCellConfig& model_cfg, int iterations, double lr,
                               int relabelings, std::uint64_t seed, AmpModel* trained) {
  auto [a, b] = generate_cycle_pair();
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::vector<TaskSample> train_set{per_start_sample(a), per_start_sample(b)};
  std::vector<TaskSample> test_set;
  for (int i = 0; i < relabelings; ++i) {
    train_set.push_back(per_start_sample(random_relabeling(a, rng)));
    train_set.push_back(per_start_sample(random_relabeling(b, rng)));
  }
  for (int i = 0; i < relabelings; ++i) {
    test_set.push_back(per_start_sample(random_relabeling(a, rng)));
    test_set.push_back(per_start_sample(random_relabeling(b, rng)));
  }
  AmpCellConfig mc = model_cfg;
  mc.seed = derive_seed(seed, 3);
  AmpModel model(mc, TaskShape{});
  TrainConfig tc;
  tc.iterations = iterations;
  tc.adam.lr = lr;
  tc.seed = derive_seed(seed, 4);
  tc.run.delay = DelayModel::constant(1.0);
  tc.run.budget_per_node = 5;
  auto history = train(model, train_set, tc);
  CyclePairResult out;
  if (!history.iterations.empty()) out.final_loss = history.iterations.back().loss;
  out.train_accuracy = accuracy(predict(model, train_set, tc.run, derive_seed(seed, 5)));
  out.test_accuracy = accuracy(predict(model, test_set, tc.run, derive_seed(seed, 6)));
  if (trained) *trained = std::move(model);
  return out;
}

namespace {

struct TuFile {
  std::string path;
  std::vector<std::pair<long long, std::string>> lines;  // (line number, text)
};

TuFile read_tu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  TuFile f{path, {}};
  std::string line;
  long long no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    f.lines.emplace_back(no, line);
  }
  return f;
}

long long parse_int(const TuFile& f, std::size_t i, const std::string& text) {
  std::istringstream ss(text);
  long long x;
  std::string rest;
  if (!(ss >> x) || (ss >> rest)) throw ParseError(f.path, f.lines[i].first, "expected an integer");
  return x;
}

std::vector<long long> parse_column(const TuFile& f) {
  std::vector<long long> out;
  for (std::size_t i = 0; i < f.lines.size(); ++i) out.push_back(parse_int(f, i, f.lines[i].second));
  return out;
}

}  // namespace

std::vector<DatasetInstance> load_tu_dataset(const std::string& dir, std::string name) {
  namespace fs = std::filesystem;
  if (name.empty()) name = fs::path(dir).lexically_normal().filename().string();
  if (name.empty()) name = fs::path(dir).parent_path().filename().string();
  auto file = [&](const char* suffix) { return (fs::path(dir) / (name + suffix)).string(); };

  const TuFile ind_f = read_tu_file(file("_graph_indicator.txt"));
  const auto indicator = parse_column(ind_f);
  const TuFile gl_f = read_tu_file(file("_graph_labels.txt"));
  const auto graph_labels = parse_column(gl_f);
  const long long n_graphs = static_cast<long long>(graph_labels.size());
  const long long n_nodes = static_cast<long long>(indicator.size());

  std::vector<long long> first(n_graphs + 1, -1), count(n_graphs, 0);
  for (long long i = 0; i < n_nodes; ++i) {
    const long long g = indicator[i];
    if (g < 1 || g > n_graphs) {
      throw ParseError(ind_f.path, ind_f.lines[i].first, "graph id out of range");
    }
    if (i > 0 && g < indicator[i - 1]) {
      throw ParseError(ind_f.path, ind_f.lines[i].first, "graph ids must be non-decreasing");
    }
    if (first[g - 1] < 0) first[g - 1] = i;
    ++count[g - 1];
  }
  for (long long g = 0; g < n_graphs; ++g) {
    if (count[g] == 0) {
      throw ParseError(gl_f.path, gl_f.lines[g].first, "graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  std::vector<long long> node_labels;
  std::string nl_path = file("_node_labels.txt");
  if (fs::exists(nl_path)) {
    const TuFile nl_f = read_tu_file(nl_path);
    node_labels = parse_column(nl_f);
    if (static_cast<long long>(node_labels.size()) != n_nodes) {
      throw ParseError(nl_path, nl_f.lines.empty() ? 0 : nl_f.lines.back().first,
                       "node label count differs from the graph indicator");
    }
  }
  std::vector<long long> label_values(node_labels);
  std::sort(label_values.begin(), label_values.end());
  label_values.erase(std::unique(label_values.begin(), label_values.end()), label_values.end());
  std::vector<long long> class_values(graph_labels);
  std::sort(class_values.begin(), class_values.end());
  class_values.erase(std::unique(class_values.begin(), class_values.end()), class_values.end());

  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(n_graphs);
  const TuFile a_f = read_tu_file(file("_A.txt"));
  for (std::size_t i = 0; i < a_f.lines.size(); ++i) {
    std::string text = a_f.lines[i].second;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream ss(text);
    long long u, v;
    std::string rest;
    if (!(ss >> u >> v) || (ss >> rest)) {
      throw ParseError(a_f.path, a_f.lines[i].first, "expected `u, v`");
    }
    if (u < 1 || u > n_nodes || v < 1 || v > n_nodes) {
      throw ParseError(a_f.path, a_f.lines[i].first, "node id out of range");
    }
    const long long g = indicator[u - 1];
    if (indicator[v - 1] != g) {
      throw ParseError(a_f.path, a_f.lines[i].first, "edge joins different graphs");
    }
    if (u == v) continue;
    edges[g - 1].emplace_back(static_cast<NodeId>(u - 1 - first[g - 1]),
                              static_cast<NodeId>(v - 1 - first[g - 1]));
  }

  std::vector<DatasetInstance> out;
  out.reserve(n_graphs);
  const int width = label_values.empty() ? 1 : static_cast<int>(label_values.size());
  for (long long g = 0; g < n_graphs; ++g) {
    const int n = static_cast<int>(count[g]);
    std::vector<double> feats;
    if (!label_values.empty()) {
      feats.assign(static_cast<std::size_t>(n) * width, 0.0);
      for (int v = 0; v < n; ++v) {
        const long long lab = node_labels[first[g] + v];
        const auto pos = std::lower_bound(label_values.begin(), label_values.end(), lab) -
                         label_values.begin();
        feats[static_cast<std::size_t>(v) * width + pos] = 1.0;
      }
    }
    const int cls = static_cast<int>(
        std::lower_bound(class_values.begin(), class_values.end(), graph_labels[g]) -
        class_values.begin());
    DatasetInstance inst;
    inst.graph = Graph::from_edges(n, edges[g], std::move(feats), width).with_graph_label(cls);
    inst.task_kind = TaskKind::kGraphClassification;
    out.push_back(std::move(inst));
  }
  return out;
}

void write_results_csv(const std::string& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << "schema_version,task,seed,size,metric,value\n";
  out.precision(17);
  for (const auto& s : report.seeds) {
    for (const auto& r : s.sizes) {
      auto row = [&](const std::string& metric, double value) {
        out << kResultsSchemaVersion << ',' << report.task << ',' << s.seed << ',' << r.size << ','
            << metric << ',' << value << '\n';
      };
      row("accuracy", r.accuracy);
      row("restricted_accuracy", r.restricted_accuracy);
      for (const auto& b : r.buckets) {
        if (b.total) row("bucket_" + std::to_string(b.lo) + "_" + std::to_string(b.hi), b.accuracy());
      }
    }
  }
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace amp
