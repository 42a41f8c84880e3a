#include "semalign/bench.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <numbers>

using namespace semalign;

namespace {

BenchConfig small_config(int agents = 2, int rounds = 2) {
  BenchConfig cfg;
  cfg.agents = agents;
  cfg.rounds = rounds;
  cfg.max_new_tokens = 8;
  cfg.seed = 42;
  return cfg;
}

TokenModelFactory toy_factory() {
  return [] { return std::make_unique<ToyTokenModel>(); };
}

}  // namespace

TEST(BuildPrompt, RoundZeroLiterals) {
  const CentralContext ctx = CentralContext::standard();
  const std::string p = build_prompt(0, "terse", "", ctx, "Explain collapse.");
  EXPECT_EQ(p.rfind("Local Dialect: terse", 0), 0u);
  EXPECT_EQ(p, "Local Dialect: terse\nTask: Explain collapse.\nAnswer in two sentences.");
}

TEST(BuildPrompt, RewriteRoundLiterals) {
  const CentralContext ctx = CentralContext::standard();
  const std::string p = build_prompt(1, "terse", "Hello.", ctx, "Q");
  EXPECT_EQ(p.rfind(ctx.prompt, 0), 0u);
  const auto text_pos = p.find("TEXT:\nHello.\nREWRITE:\n");
  EXPECT_NE(text_pos, std::string::npos);
  EXPECT_NE(p.find("\nRewrite TEXT to comply; preserve meaning if possible; "
                   "prioritize compliance.\nTEXT:\n"),
            std::string::npos);
}

TEST(BuildPrompt, EmptyPreviousTextStillWellFormed) {
  const CentralContext ctx = CentralContext::standard();
  const std::string p = build_prompt(1, "d", "", ctx, "Q");
  EXPECT_NE(p.find("TEXT:\n\nREWRITE:\n"), std::string::npos);
  EXPECT_THROW(build_prompt(-1, "d", "", ctx, "Q"), std::invalid_argument);
}

TEST(RunBenchmark, RowCountArithmetic) {
  const BenchResult r = run_benchmark(small_config(2, 2), toy_factory());
  ASSERT_FALSE(r.failed) << r.error;
  EXPECT_EQ(r.trace.size(), 8u);  // 2 agents x 2 rounds x 2 trajectories
  EXPECT_EQ(r.summary.size(), 2u);
  EXPECT_FALSE(r.anchor_text.empty());
}

TEST(RunBenchmark, SummaryHasOneRowPerTrajectory) {
  const BenchResult r = run_benchmark(small_config(3, 2), toy_factory());
  ASSERT_FALSE(r.failed);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_EQ(r.summary[0].trajectory, "smooth_greedy");
  EXPECT_EQ(r.summary[1].trajectory, "stochastic_tp");
  for (const SummaryRow& row : r.summary) {
    EXPECT_NEAR(row.collision_rate,
                1.0 - static_cast<double>(row.unique_finals) / 3.0, 1e-12);
  }
}

TEST(RunBenchmark, TraceRowInvariants) {
  const BenchResult r = run_benchmark(small_config(4, 3), toy_factory());
  ASSERT_FALSE(r.failed);
  for (const TraceRow& row : r.trace) {
    EXPECT_GE(row.entropy, 0.0);
    EXPECT_GE(row.fisher_rao, 0.0);
    EXPECT_LE(row.fisher_rao, std::numbers::pi);
    EXPECT_GE(row.kl, 0.0);
    const double c4 = row.compliance * 4.0;
    EXPECT_NEAR(c4, std::round(c4), 1e-12);
    EXPECT_GE(row.top1, 0.0);
    EXPECT_LE(row.top1, 1.0);
    EXPECT_EQ(row.model_id, "toy-64");
    EXPECT_EQ(row.seed, 42u);
  }
}

TEST(RunBenchmark, RowsSortedByTrajectoryAgentRound) {
  const BenchResult r = run_benchmark(small_config(3, 2), toy_factory());
  ASSERT_FALSE(r.failed);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const auto& a = r.trace[i - 1];
    const auto& b = r.trace[i];
    EXPECT_LE(std::tie(a.trajectory, a.agent, a.round),
              std::tie(b.trajectory, b.agent, b.round));
  }
}

TEST(RunBenchmark, ByteIdenticalAcrossRunsAndWorkerCounts) {
  BenchConfig cfg = small_config(4, 3);
  const BenchResult a = run_benchmark(cfg, toy_factory());
  const BenchResult b = run_benchmark(cfg, toy_factory());
  cfg.workers = 4;
  const BenchResult c = run_benchmark(cfg, toy_factory());
  ASSERT_FALSE(a.failed);
  ASSERT_FALSE(c.failed);
  EXPECT_EQ(trace_csv(a.trace), trace_csv(b.trace));
  EXPECT_EQ(trace_csv(a.trace), trace_csv(c.trace));
  EXPECT_EQ(summary_csv(a.summary), summary_csv(c.summary));
  EXPECT_EQ(a.anchor_text, c.anchor_text);
}

namespace {

/// Generator that starts failing after a fixed number of calls.
class FlakyGenerator final : public Generator {
 public:
  explicit FlakyGenerator(std::shared_ptr<std::atomic<int>> budget)
      : budget_(std::move(budget)) {}

  GenerationResult generate(const std::string& prompt, const DecodeConfig& cfg,
                            int max_new_tokens, std::uint64_t seed) override {
    if (--(*budget_) < 0) throw std::runtime_error("backend connection lost");
    return inner_.generate(prompt, cfg, max_new_tokens, seed);
  }

  std::string model_id() override { return inner_.model_id(); }

 private:
  std::shared_ptr<std::atomic<int>> budget_;
  LocalGenerator inner_{std::make_unique<ToyTokenModel>()};
};

}  // namespace

TEST(RunBenchmark, BackendFailureKeepsPartialTrace) {
  auto budget = std::make_shared<std::atomic<int>>(6);  // anchor + 5 rounds
  const GeneratorFactory factory = [budget]() -> std::unique_ptr<Generator> {
    return std::make_unique<FlakyGenerator>(budget);
  };
  const BenchResult r = run_benchmark(small_config(4, 3), factory);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.error.empty());
  EXPECT_GT(r.trace.size(), 0u);
  EXPECT_LT(r.trace.size(), 24u);
  EXPECT_TRUE(r.summary.empty());
}

TEST(TraceCsv, HeaderAndShape) {
  const BenchResult r = run_benchmark(small_config(2, 2), toy_factory());
  ASSERT_FALSE(r.failed);
  const std::string csv = trace_csv(r.trace);
  EXPECT_EQ(csv.rfind("model_id,seed,agent,trajectory,round,entropy,top1,"
                      "fisher_rao,kl,compliance,chars,hash64\n",
                      0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);  // header + 8 rows
}

TEST(SummaryCsv, HeaderMatchesSchema) {
  const std::string csv = summary_csv({});
  EXPECT_EQ(csv, "trajectory,unique_finals,collision_rate,jaccard_final_anchor,"
                 "jaccard_greedy_stochastic,mean_compliance\n");
}

TEST(PlotSeries, OneMeanPerRound) {
  const BenchResult r = run_benchmark(small_config(5, 4), toy_factory());
  ASSERT_FALSE(r.failed);
  const auto series = plot_series_from_trace(r.trace);
  ASSERT_EQ(series.size(), 2u);
  for (const PlotSeries& s : series) {
    EXPECT_EQ(s.mean_entropy.size(), 4u);
    EXPECT_EQ(s.mean_compliance.size(), 4u);
  }
}

TEST(PlotSeries, SingleAgentMeansAreRawValues) {
  const BenchResult r = run_benchmark(small_config(1, 3), toy_factory());
  ASSERT_FALSE(r.failed);
  const auto series = plot_series_from_trace(r.trace);
  for (const PlotSeries& s : series) {
    for (const auto& [round, value] : s.mean_entropy) {
      for (const TraceRow& row : r.trace)
        if (row.trajectory == s.trajectory && row.round == round)
          EXPECT_EQ(value, row.entropy);
    }
  }
}

TEST(PlotSeries, EmptyTraceIsError) {
  EXPECT_THROW(plot_series_from_trace({}), std::invalid_argument);
}

TEST(RunBenchmark, CrossTrajectoryJaccardIsSymmetric) {
  const BenchResult r = run_benchmark(small_config(4, 2), toy_factory());
  ASSERT_FALSE(r.failed);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_EQ(r.summary[0].jaccard_cross, r.summary[1].jaccard_cross);
}

TEST(BenchConfig, Validation) {
  BenchConfig cfg = small_config();
  cfg.agents = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.trajectories.push_back(cfg.trajectories.front());
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
