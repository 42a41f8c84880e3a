#pragma once

#include <array>
#include <string_view>

namespace semalign {

/// Hand-scored compliance fixtures: a fully compliant text, one isolated
/// violation per checklist item, the empty text, an over-limit text, and
/// assorted edge cases of the sentence heuristic. Expected scores were
/// worked out by hand against the declared checklist before the scorer
/// was written; they are frozen here and must be reproduced exactly.
struct ComplianceCase {
  std::string_view text;
  double expected;
};

inline constexpr std::array<ComplianceCase, 12> kComplianceCorpus{{
    // all four checks pass
    {"Therefore, the model converges. Therefore, alignment holds.", 1.0},
    // '!' and '?' are sentence terminators too
    {"Therefore, agents align! Therefore, entropy collapses?", 1.0},
    // three sentences: violates (i) only
    {"Therefore, systems align. Therefore, states converge. Therefore, "
     "entropy falls.",
     0.75},
    // first sentence lacks the prefix: violates (ii) only
    {"The model converges. Therefore, alignment holds.", 0.75},
    // second sentence lacks the prefix: violates (ii) only
    {"Therefore, models converge. Alignment holds.", 0.75},
    // 25 words: violates (iii) only
    {"Therefore, the anchor context governs every peripheral node state "
     "without exception across rounds. Therefore, all outputs describe "
     "alignment, convergence, collapse, and consensus during each round.",
     0.75},
    // blocklisted pronoun: violates (iv) only
    {"Therefore, it converges. Therefore, alignment holds.", 0.75},
    // empty text fails (i) and (ii), vacuously passes (iii) and (iv)
    {"", 0.5},
    // over-limit rambling with pronouns and no structure: fails everything
    {"We believe the system will converge because we expect the anchor to "
     "dominate all peripheral agents and we think their states must follow "
     "its semantics in every later round of this procedure",
     0.0},
    // spec'd mixed case: three sentences, no prefixes, pronouns present
    {"We think so. It works. Done.", 0.25},
    // single terminated sentence
    {"Therefore, convergence.", 0.75},
    // unterminated trailing text still counts as one sentence
    {"Therefore, the anchor governs all states", 0.75},
}};

}  // namespace semalign
