#include "amp/train.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "amp/error.h"
#include "amp/rng.h"

namespace amp {

long long RunSettings::budget_for(const AmpModel& model, int n) const {
  const int per_node =
      model.config().halting == HaltingKind::kNone ? budget_per_node : halting_cap_per_node;
  return static_cast<long long>(per_node) * n;
}

namespace {

int argmax(const Tensor& t) {
  return static_cast<int>(std::max_element(t.data.begin(), t.data.end()) - t.data.begin());
}

std::vector<NodeId> run_starts(const TaskSample& s) {
  if (!s.starts.empty()) return s.starts;
  std::vector<NodeId> all(s.graph.num_nodes());
  for (NodeId v = 0; v < s.graph.num_nodes(); ++v) all[v] = v;
  return all;
}

int node_label(const TaskSample& s, int head, NodeId v) {
  if (head >= static_cast<int>(s.node_labels.size()) ||
      v >= static_cast<NodeId>(s.node_labels[head].size())) {
    throw ContractViolation("sample lacks a label for node " + std::to_string(v));
  }
  return s.node_labels[head][v];
}

RunResult<AmpNodeState, AmpMessage> run_once(Tape& tape, const AmpModel& model,
                                             const TaskSample& s, const RunSettings& settings,
                                             NodeId start, std::vector<NodeId> extra,
                                             std::uint64_t seed) {
  AmpProgram program(model, tape);
  RunConfig cfg;
  cfg.start_node = start;
  cfg.extra_starts = std::move(extra);
  cfg.message_budget = settings.budget_for(model, s.graph.num_nodes());
  cfg.delay = settings.delay;
  cfg.delay.seed = seed;
  cfg.record_trace = false;
  return run(s.graph, program, cfg);
}

}  // namespace

SampleForward forward_sample(Tape& tape, const AmpModel& model, const TaskSample& sample,
                             const RunSettings& settings, std::uint64_t seed) {
  SampleForward out;
  const auto starts = run_starts(sample);
  switch (sample.mode) {
    case TaskMode::kPerStart:
      for (std::size_t r = 0; r < starts.size(); ++r) {
        const NodeId v = starts[r];
        const int label = node_label(sample, 0, v);
        if (label < 0) continue;
        auto res = run_once(tape, model, sample, settings, v, {}, derive_seed(seed, r));
        out.deliveries += res.deliveries;
        Var emb = readout_embedding(tape, model, res.states[v]);
        out.predictions.push_back({0, v, label, readout_node(tape, model, emb, 0)});
      }
      break;
    case TaskMode::kMarked: {
      if (sample.starts.empty()) throw InvalidArgument("marked sample needs at least one start");
      if (static_cast<int>(sample.starts.size()) > model.shape().origin_channels) {
        throw ContractViolation("more marked starts than origin channels");
      }
      std::vector<NodeId> extra(sample.starts.begin() + 1, sample.starts.end());
      auto res = run_once(tape, model, sample, settings, sample.starts[0], extra,
                          derive_seed(seed, 0));
      out.deliveries += res.deliveries;
      for (NodeId v = 0; v < sample.graph.num_nodes(); ++v) {
        Var emb = readout_embedding(tape, model, res.states[v]);
        for (int k = 0; k < model.shape().num_heads; ++k) {
          const int label = node_label(sample, k, v);
          if (label < 0) continue;
          out.predictions.push_back({k, v, label, readout_node(tape, model, emb, k)});
        }
      }
      break;
    }
    case TaskMode::kGraph: {
      if (sample.graph_label < 0) throw ContractViolation("graph sample lacks a label");
      std::vector<Var> embs;
      for (std::size_t r = 0; r < starts.size(); ++r) {
        auto res = run_once(tape, model, sample, settings, starts[r], {}, derive_seed(seed, r));
        out.deliveries += res.deliveries;
        embs.push_back(readout_embedding(tape, model, res.states[starts[r]]));
      }
      out.predictions.push_back({0, -1, sample.graph_label, pool_runs(tape, model, embs)});
      break;
    }
  }
  return out;
}

TrainHistory train(AmpModel& model, const std::vector<TaskSample>& samples, const TrainConfig& cfg,
                   const std::function<void(const IterationMetrics&)>& on_iteration) {
  if (samples.empty()) throw InvalidArgument("training set is empty");
  if (cfg.iterations < 0) throw InvalidArgument("iterations must be >= 0");
  ParameterStore& store = model.params();
  TrainHistory history;
  for (int it = 0; it < cfg.iterations; ++it) {
    store.zero_grad();
    std::vector<Tape> tapes;
    std::vector<Var> losses;
    tapes.reserve(samples.size());
    long long total = 0;
    long long correct = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      tapes.emplace_back(&store);
      Tape& tape = tapes.back();
      const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, it), i);
      auto fwd = forward_sample(tape, model, samples[i], cfg.run, seed);
      Var loss;
      for (const auto& p : fwd.predictions) {
        Var l = tape.softmax_cross_entropy(p.logits, p.label);
        loss = loss.valid() ? tape.add(loss, l) : l;
        correct += argmax(tape.value(p.logits)) == p.label;
        ++total;
      }
      losses.push_back(loss);
      if (loss.valid()) loss_sum += tape.value(loss).data[0];
    }
    if (total == 0) throw InvalidArgument("training set has no labeled predictions");
    const double mean_loss = loss_sum / static_cast<double>(total);
    if (!std::isfinite(mean_loss)) {
      throw NumericFailure("non-finite loss at iteration " + std::to_string(it), it);
    }
    for (std::size_t i = 0; i < tapes.size(); ++i) {
      if (!losses[i].valid()) continue;
      Tape& tape = tapes[i];
      tape.backward(tape.scale(losses[i], 1.0 / static_cast<double>(total)));
    }
    IterationMetrics m;
    m.iteration = it;
    m.loss = mean_loss;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    m.grad_norm = cfg.clip_norm > 0 ? store.clip_grad_norm(cfg.clip_norm) : store.grad_norm();
    adam_step(store, cfg.adam);
    history.iterations.push_back(m);
    if (on_iteration) on_iteration(m);
  }
  return history;
}

std::vector<NodePrediction> predict(const AmpModel& model, const std::vector<TaskSample>& samples,
                                    const RunSettings& settings, std::uint64_t seed, int jobs) {
  std::vector<std::vector<NodePrediction>> per_sample(samples.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    AmpModel local(model.config(), model.shape(), model.params());
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      try {
        Tape tape(&local.params());
        auto fwd = forward_sample(tape, local, samples[i], settings, derive_seed(seed, i));
        for (const auto& p : fwd.predictions) {
          per_sample[i].push_back({static_cast<int>(i), p.head, p.node, p.label,
                                   argmax(tape.value(p.logits))});
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = samples.size();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(samples.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<NodePrediction> out;
  for (auto& v : per_sample) out.insert(out.end(), v.begin(), v.end());
  return out;
}

double accuracy(const std::vector<NodePrediction>& predictions) {
  if (predictions.empty()) return 0.0;
  long long correct = 0;
  for (const auto& p : predictions) correct += p.label == p.predicted;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace amp
