#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semalign/prob.hpp"
#include "semalign/rng.hpp"
#include "semalign/textmetrics.hpp"

namespace semalign {

struct DecodeConfig {
  enum class Mode { Greedy, Stochastic };

  Mode mode = Mode::Greedy;
  double temperature = 0.0;
  double top_p = 1.0;
  int top_k = 0;  // 0 disables top-k truncation

  static DecodeConfig greedy() { return DecodeConfig{}; }

  static DecodeConfig stochastic(double temperature, double top_p, int top_k = 0) {
    DecodeConfig c{Mode::Stochastic, temperature, top_p, top_k};
    c.validate();
    return c;
  }

  void validate() const {
    if (mode == Mode::Greedy && temperature != 0.0)
      throw std::invalid_argument("greedy decoding requires temperature = 0");
    if (mode == Mode::Stochastic && !(temperature > 0.0))
      throw std::invalid_argument("stochastic decoding requires temperature > 0");
    if (!(top_p > 0.0) || top_p > 1.0)
      throw std::invalid_argument("top_p must lie in (0, 1]");
    if (top_k < 0) throw std::invalid_argument("top_k must be >= 0");
  }
};

/**
 * Pluggable next-token backend. next_distribution(prompt) resets the
 * context to the prompt and returns the boundary distribution at the
 * declared reporting temperature of 1.0; step(token) appends one selected
 * token and returns the new boundary distribution. next_distribution must
 * be deterministic given (model, prompt).
 */
class TokenModel {
 public:
  virtual ~TokenModel() = default;

  virtual ProbVector next_distribution(const std::string& prompt) = 0;
  virtual ProbVector step(int token) = 0;
  virtual std::string_view piece(int token) const = 0;
  virtual int eos_token() const = 0;  // -1 when the vocabulary has none
  virtual int vocab_size() const = 0;
  virtual std::string model_id() const = 0;
};

namespace toy {

inline constexpr int kVocabSize = 64;
inline constexpr double kConcentration = 3.0;  // gamma
inline constexpr int kEosToken = 0;

/// Vocabulary pieces: index 0 is end-of-sequence (empty piece); the rest
/// are words carrying a leading space, llama-style.
inline const std::vector<std::string>& pieces() {
  static const std::vector<std::string> v = [] {
    static const char* kWords[kVocabSize - 1] = {
        "anchor",     "agent",      "alignment",  "collapse",   "consensus",
        "context",    "entropy",    "gradient",   "manifold",   "state",
        "semantic",   "peripheral", "dominant",   "trajectory", "distance",
        "geodesic",   "converges",  "aligns",     "binds",      "governs",
        "holds",      "reduces",    "remains",    "follows",    "absorbs",
        "fixed",      "shared",     "global",     "local",      "stable",
        "final",      "every",      "each",       "the",        "a",
        "toward",     "under",      "within",     "across",     "between",
        "and",        "or",         "so",         "then",       "thus",
        "hence",      "while",      "until",      "round",      "output",
        "token",      "tensor",     "vector",     "grammar",    "protocol",
        "structure",  "meaning",    "variation",  "diversity",  "freedom",
        "inertia",    "loss",       "limit"};
    std::vector<std::string> out;
    out.reserve(kVocabSize);
    out.emplace_back("");  // EOS
    for (const char* w : kWords) out.emplace_back(std::string(" ") + w);
    return out;
  }();
  return v;
}

}  // namespace toy

/// Deterministic desk-scale distribution: logits over a 64-token
/// vocabulary are a pure function of the 64-bit hash of the prompt (a
/// hash-seeded Gaussian draw per token, EOS biased down); prompts carrying
/// the Central Context marker have their logits multiplied by the
/// concentration factor gamma = 3 before the softmax, which sharpens the
/// distribution.
inline ProbVector toy_next_distribution(const std::string& prompt) {
  Rng rng(hash64(prompt));
  std::vector<double> logits(toy::kVocabSize);
  for (double& l : logits) l = rng.gaussian();
  logits[toy::kEosToken] -= 1.0;
  if (prompt.find(kCentralContextMarker) != std::string::npos)
    for (double& l : logits) l *= toy::kConcentration;
  return softmax(logits);
}

class ToyTokenModel final : public TokenModel {
 public:
  ProbVector next_distribution(const std::string& prompt) override {
    context_ = prompt;
    return toy_next_distribution(context_);
  }

  ProbVector step(int token) override {
    context_ += piece(token);
    return toy_next_distribution(context_);
  }

  std::string_view piece(int token) const override {
    if (token < 0 || token >= toy::kVocabSize)
      throw std::invalid_argument("toy token out of range");
    return toy::pieces()[static_cast<std::size_t>(token)];
  }

  int eos_token() const override { return toy::kEosToken; }
  int vocab_size() const override { return toy::kVocabSize; }
  std::string model_id() const override { return "toy-64"; }

 private:
  std::string context_;
};

inline int argmax_token(const ProbVector& p) {
  int best = 0;
  for (std::size_t j = 1; j < p.size(); ++j)
    if (p[j] > p[best]) best = static_cast<int>(j);
  return best;
}

/// Generates at most max_new_tokens tokens from the prompt, stopping at
/// end-of-sequence, and returns the trimmed text together with the
/// boundary distribution captured at the prompt position (always at the
/// reporting temperature 1.0, independent of the decode config; sampling
/// applies the config's own temperature and nucleus truncation).
inline std::pair<std::string, ProbVector> generate_with_probs(
    TokenModel& model, const std::string& prompt, const DecodeConfig& cfg,
    int max_new_tokens, Rng& rng) {
  cfg.validate();
  if (max_new_tokens < 0) throw std::invalid_argument("max_new_tokens must be >= 0");

  const ProbVector boundary = model.next_distribution(prompt);
  ProbVector current = boundary;
  std::string text;
  for (int t = 0; t < max_new_tokens; ++t) {
    int token;
    if (cfg.mode == DecodeConfig::Mode::Greedy) {
      token = argmax_token(current);
    } else {
      const ProbVector reweighted = apply_temperature(current, cfg.temperature);
      token = top_p_sample(reweighted, cfg.top_p, cfg.top_k, rng);
    }
    if (token == model.eos_token()) break;
    text += model.piece(token);
    current = model.step(token);
  }
  return {trim(text), boundary};
}

/**
 * Backend-neutral generation handle used by the benchmark loop: the local
 * implementation wraps an in-process TokenModel; the remote one speaks the
 * socket protocol (see backend.hpp). One generator belongs to exactly one
 * worker at a time.
 */
struct GenerationResult {
  std::string text;
  ProbVector boundary;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenerationResult generate(const std::string& prompt,
                                    const DecodeConfig& cfg, int max_new_tokens,
                                    std::uint64_t seed) = 0;
  virtual std::string model_id() = 0;
};

class LocalGenerator final : public Generator {
 public:
  explicit LocalGenerator(std::unique_ptr<TokenModel> model)
      : model_(std::move(model)) {
    if (!model_) throw std::invalid_argument("null token model");
  }

  GenerationResult generate(const std::string& prompt, const DecodeConfig& cfg,
                            int max_new_tokens, std::uint64_t seed) override {
    Rng rng(seed);
    auto [text, boundary] = generate_with_probs(*model_, prompt, cfg, max_new_tokens, rng);
    return GenerationResult{std::move(text), std::move(boundary)};
  }

  std::string model_id() override { return model_->model_id(); }

 private:
  std::unique_ptr<TokenModel> model_;
};

using GeneratorFactory = std::function<std::unique_ptr<Generator>()>;
using TokenModelFactory = std::function<std::unique_ptr<TokenModel>()>;

inline GeneratorFactory local_generator_factory(TokenModelFactory models) {
  return [models = std::move(models)]() -> std::unique_ptr<Generator> {
    return std::make_unique<LocalGenerator>(models());
  };
}

}  // namespace semalign
