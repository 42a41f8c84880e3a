#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "semalign/io.hpp"
#include "semalign/prob.hpp"
#include "semalign/rng.hpp"
#include "semalign/textmetrics.hpp"
#include "semalign/token_model.hpp"

namespace semalign {

/**
 * Dataset-free semantic-collapse benchmark. Round 0 elicits an
 * unconstrained dialect-seeded answer; every later round prepends the
 * Central Context and asks for a compliant rewrite of the previous output.
 * Per-round boundary distributions are compared against the anchor
 * distribution, and final outputs against the anchor text.
 */

struct TrajectorySpec {
  std::string name;
  DecodeConfig decode;
};

inline std::vector<TrajectorySpec> default_trajectories() {
  return {
      TrajectorySpec{"smooth_greedy", DecodeConfig::greedy()},
      TrajectorySpec{"stochastic_tp", DecodeConfig::stochastic(1.0, 0.95, 0)},
  };
}

inline std::vector<std::string> default_dialects(int n) {
  static const char* kSeeds[] = {
      "terse",     "verbose", "archaic",  "slang",        "formal",
      "poetic",    "technical", "legalese", "casual",     "florid",
      "minimalist", "baroque", "clinical", "rustic",      "bureaucratic",
      "telegraphic"};
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i < static_cast<int>(std::size(kSeeds)))
      out.emplace_back(kSeeds[i]);
    else
      out.emplace_back("dialect-" + std::to_string(i + 1));
  }
  return out;
}

inline constexpr std::string_view kDefaultQuery =
    "Explain why repeated rewriting under a fixed context reduces variation.";

struct BenchConfig {
  int agents = 16;
  int rounds = 6;
  int max_new_tokens = 16;
  std::uint64_t seed = 42;
  std::vector<std::string> dialects;  // filled to `agents` entries when short
  std::string query = std::string(kDefaultQuery);
  CentralContext context = CentralContext::standard();
  std::vector<TrajectorySpec> trajectories = default_trajectories();
  int workers = 1;

  void validate() const {
    if (agents < 1) throw std::invalid_argument("agents must be >= 1");
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (max_new_tokens < 0) throw std::invalid_argument("max_new_tokens must be >= 0");
    if (trajectories.empty()) throw std::invalid_argument("need at least one trajectory");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    std::set<std::string> names;
    for (const TrajectorySpec& t : trajectories) {
      t.decode.validate();
      if (!names.insert(t.name).second)
        throw std::invalid_argument("duplicate trajectory name: " + t.name);
    }
  }
};

struct TraceRow {
  std::string model_id;
  std::uint64_t seed;
  int agent;
  std::string trajectory;
  int round;
  double entropy;
  double top1;
  double fisher_rao;
  double kl;
  double compliance;
  std::int64_t chars;
  std::uint64_t hash;
};

struct SummaryRow {
  std::string trajectory;
  int unique_finals;
  double collision_rate;
  double jaccard_final_anchor;
  double jaccard_cross;  // vs the other trajectory's finals, agent-wise
  double mean_compliance;
};

struct BenchResult {
  std::vector<TraceRow> trace;
  std::vector<SummaryRow> summary;
  std::string anchor_text;
  bool failed = false;
  std::string error;
};

/// Round-0 prompts seed a dialect; later rounds demand a compliant rewrite
/// of the previous text under the Central Context. Literals are byte-exact.
inline std::string build_prompt(int round, const std::string& dialect,
                                const std::string& previous,
                                const CentralContext& ctx,
                                const std::string& query) {
  if (round < 0) throw std::invalid_argument("round must be >= 0");
  if (round == 0)
    return "Local Dialect: " + dialect + "\nTask: " + query +
           "\nAnswer in two sentences.";
  return ctx.prompt +
         "\nRewrite TEXT to comply; preserve meaning if possible; prioritize "
         "compliance.\nTEXT:\n" +
         previous + "\nREWRITE:\n";
}

namespace detail_bench {

/// PRNG stream layout: per-trajectory streams derive from (seed, name),
/// per-agent substreams from the trajectory stream, and each round's
/// request seed from the agent substream. Workers therefore never share
/// stream state and the merged output is interleaving-independent.
inline std::uint64_t round_seed(std::uint64_t master, const std::string& traj,
                                int agent, int round) {
  const std::uint64_t traj_stream = derive_seed(master, "bench/" + traj);
  const std::uint64_t agent_stream =
      derive_seed(traj_stream, "agent", static_cast<std::uint64_t>(agent));
  return derive_seed(agent_stream, "round", static_cast<std::uint64_t>(round));
}

}  // namespace detail_bench

inline BenchResult run_benchmark(const BenchConfig& cfg,
                                 const GeneratorFactory& make_generator) {
  cfg.validate();

  std::vector<std::string> dialects = cfg.dialects;
  if (static_cast<int>(dialects.size()) < cfg.agents) {
    const std::vector<std::string> defaults = default_dialects(cfg.agents);
    for (std::size_t i = dialects.size(); i < defaults.size(); ++i)
      dialects.push_back(defaults[i]);
  }

  BenchResult result;

  // Anchor reference: greedy decode from the Central Context, once.
  ProbVector anchor_dist{{1.0}};
  try {
    const std::unique_ptr<Generator> gen = make_generator();
    const GenerationResult anchor =
        gen->generate(cfg.context.prompt + "Produce the compliant answer.",
                      DecodeConfig::greedy(), cfg.max_new_tokens,
                      derive_seed(cfg.seed, "bench/anchor"));
    result.anchor_text = anchor.text;
    anchor_dist = anchor.boundary;
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = std::string("anchor generation failed: ") + e.what();
    return result;
  }

  struct Task {
    int traj_index;
    int agent;  // 1-based, matching the trace schema
  };
  std::vector<Task> tasks;
  for (int ti = 0; ti < static_cast<int>(cfg.trajectories.size()); ++ti)
    for (int agent = 1; agent <= cfg.agents; ++agent)
      tasks.push_back(Task{ti, agent});

  std::mutex sink;
  std::map<std::pair<std::string, int>, std::string> finals;
  std::size_t next_task = 0;
  bool failed = false;
  std::string error;

  const auto worker = [&] {
    std::unique_ptr<Generator> gen;
    try {
      gen = make_generator();
    } catch (const std::exception& e) {
      std::lock_guard lock(sink);
      failed = true;
      if (error.empty()) error = e.what();
      return;
    }
    for (;;) {
      Task task{};
      {
        std::lock_guard lock(sink);
        if (failed || next_task >= tasks.size()) return;
        task = tasks[next_task++];
      }
      const TrajectorySpec& traj = cfg.trajectories[task.traj_index];
      std::vector<TraceRow> rows;
      std::string text;
      try {
        for (int r = 0; r < cfg.rounds; ++r) {
          const std::string prompt = build_prompt(
              r, dialects[task.agent - 1], text, cfg.context, cfg.query);
          const GenerationResult gr = gen->generate(
              prompt, traj.decode, cfg.max_new_tokens,
              detail_bench::round_seed(cfg.seed, traj.name, task.agent, r));
          text = gr.text;
          rows.push_back(TraceRow{
              gen->model_id(), cfg.seed, task.agent, traj.name, r,
              shannon_entropy(gr.boundary), top1(gr.boundary),
              fisher_rao(gr.boundary, anchor_dist),
              kl_divergence(gr.boundary, anchor_dist),
              compliance_score(text, cfg.context),
              static_cast<std::int64_t>(text.size()), hash64(text)});
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(sink);
        failed = true;
        if (error.empty())
          error = "trajectory " + traj.name + ", agent " +
                  std::to_string(task.agent) + ": " + e.what();
        // keep the rows completed so far: partial trace is persisted
        for (TraceRow& row : rows) result.trace.push_back(std::move(row));
        return;
      }
      std::lock_guard lock(sink);
      for (TraceRow& row : rows) result.trace.push_back(std::move(row));
      finals[{traj.name, task.agent}] = text;
    }
  };

  const int n_workers =
      std::min<int>(cfg.workers, static_cast<int>(tasks.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::sort(result.trace.begin(), result.trace.end(),
            [](const TraceRow& a, const TraceRow& b) {
              return std::tie(a.trajectory, a.agent, a.round) <
                     std::tie(b.trajectory, b.agent, b.round);
            });

  if (failed) {
    result.failed = true;
    result.error = error;
    return result;
  }

  // Summary: one row per trajectory, ordered by trajectory name like the trace.
  std::vector<std::string> names;
  for (const TrajectorySpec& t : cfg.trajectories) names.push_back(t.name);
  std::sort(names.begin(), names.end());

  for (const std::string& name : names) {
    std::vector<std::string> traj_finals;
    double jac_anchor = 0.0, compliance = 0.0;
    for (int agent = 1; agent <= cfg.agents; ++agent) {
      const std::string& text = finals.at({name, agent});
      traj_finals.push_back(text);
      jac_anchor += jaccard_similarity(text, result.anchor_text);
      compliance += compliance_score(text, cfg.context);
    }
    double jac_cross = 0.0;
    int cross_count = 0;
    for (const std::string& other : names) {
      if (other == name) continue;
      for (int agent = 1; agent <= cfg.agents; ++agent)
        jac_cross +=
            jaccard_similarity(finals.at({name, agent}), finals.at({other, agent}));
      cross_count += cfg.agents;
    }
    std::set<std::uint64_t> unique;
    for (const std::string& t : traj_finals) unique.insert(hash64(t));

    result.summary.push_back(SummaryRow{
        name, static_cast<int>(unique.size()), collision_rate(traj_finals),
        jac_anchor / cfg.agents,
        cross_count > 0 ? jac_cross / cross_count : 0.0,
        compliance / cfg.agents});
  }

  return result;
}

inline BenchResult run_benchmark(const BenchConfig& cfg, TokenModelFactory models) {
  return run_benchmark(cfg, local_generator_factory(std::move(models)));
}

// ---------------------------------------------------------------------------
// Artifact emission

inline constexpr std::string_view kTraceHeader =
    "model_id,seed,agent,trajectory,round,entropy,top1,fisher_rao,kl,"
    "compliance,chars,hash64";

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out{kTraceHeader};
  out += '\n';
  for (const TraceRow& r : rows) {
    out += r.model_id;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.agent);
    out += ',';
    out += r.trajectory;
    out += ',';
    out += std::to_string(r.round);
    out += ',';
    out += format_double(r.entropy);
    out += ',';
    out += format_double(r.top1);
    out += ',';
    out += format_double(r.fisher_rao);
    out += ',';
    out += format_double(r.kl);
    out += ',';
    out += format_double(r.compliance);
    out += ',';
    out += std::to_string(r.chars);
    out += ',';
    out += format_hash(r.hash);
    out += '\n';
  }
  return out;
}

inline constexpr std::string_view kSummaryHeader =
    "trajectory,unique_finals,collision_rate,jaccard_final_anchor,"
    "jaccard_greedy_stochastic,mean_compliance";

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out{kSummaryHeader};
  out += '\n';
  for (const SummaryRow& r : rows) {
    out += r.trajectory;
    out += ',';
    out += std::to_string(r.unique_finals);
    out += ',';
    out += format_double(r.collision_rate);
    out += ',';
    out += format_double(r.jaccard_final_anchor);
    out += ',';
    out += format_double(r.jaccard_cross);
    out += ',';
    out += format_double(r.mean_compliance);
    out += '\n';
  }
  return out;
}

/// Per-trajectory round means of entropy and compliance, the two panels of
/// the benchmark dynamics plot.
struct PlotSeries {
  std::string trajectory;
  std::vector<std::pair<int, double>> mean_entropy;
  std::vector<std::pair<int, double>> mean_compliance;
};

inline std::vector<PlotSeries> plot_series_from_trace(
    const std::vector<TraceRow>& rows) {
  if (rows.empty())
    throw std::invalid_argument("plot series require a non-empty trace");
  std::map<std::string, std::map<int, std::pair<double, int>>> ent, comp;
  for (const TraceRow& r : rows) {
    auto& e = ent[r.trajectory][r.round];
    e.first += r.entropy;
    e.second += 1;
    auto& c = comp[r.trajectory][r.round];
    c.first += r.compliance;
    c.second += 1;
  }
  std::vector<PlotSeries> out;
  for (const auto& [traj, by_round] : ent) {
    PlotSeries s{traj, {}, {}};
    for (const auto& [round, acc] : by_round)
      s.mean_entropy.emplace_back(round, acc.first / acc.second);
    for (const auto& [round, acc] : comp[traj])
      s.mean_compliance.emplace_back(round, acc.first / acc.second);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string plot_series_csv(
    const std::vector<std::pair<int, double>>& series,
    std::string_view value_name) {
  std::string out = "round,";
  out += value_name;
  out += '\n';
  for (const auto& [round, value] : series) {
    out += std::to_string(round);
    out += ',';
    out += format_double(value);
    out += '\n';
  }
  return out;
}

}  // namespace semalign
