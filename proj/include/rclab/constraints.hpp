#pragma once

// Length constraints and constraint-carrying prompts. A constrained prompt
// serializes to a fixed three-token header (kind marker, then word_num as two
// base-V digits) followed by the base prompt, so the round trip is lossless
// as long as base prompts never start with a marker id. Corpus generation
// only draws prompt tokens from the content band, which guarantees that.

#include <optional>
#include <stdexcept>

#include "rclab/tokens.hpp"

namespace rclab {

enum class ConstraintKind { AtMost, AtLeast };

struct LengthConstraint {
  ConstraintKind kind;
  int word_num;

  bool satisfied_by(const VocabLayout& vocab, const TokenSequence& y) const {
    const int wc = vocab.word_count(y);
    return kind == ConstraintKind::AtMost ? wc <= word_num : wc >= word_num;
  }
};

// Builders and parsers go through here so word_num bounds are enforced in one
// place; satisfied_by itself stays total (word_num 0 is simply vacuous or
// unsatisfiable depending on kind).
inline LengthConstraint make_constraint(const VocabLayout& vocab,
                                        ConstraintKind kind, int word_num) {
  if (word_num < 1 || word_num > vocab.max_word_num())
    throw std::invalid_argument("constraint word_num out of range");
  return {kind, word_num};
}

struct AugmentedPrompt {
  TokenSequence base;
  std::optional<LengthConstraint> constraint;

  bool operator==(const AugmentedPrompt&) const = default;
};

inline bool operator==(const LengthConstraint& a, const LengthConstraint& b) {
  return a.kind == b.kind && a.word_num == b.word_num;
}

inline TokenSequence serialize_prompt(const VocabLayout& vocab,
                                      const AugmentedPrompt& p) {
  if (!p.constraint) return p.base;
  const auto& c = *p.constraint;
  if (c.word_num < 0 || c.word_num > vocab.max_word_num())
    throw std::domain_error("word_num not representable in two digits");
  TokenSequence out;
  out.reserve(p.base.size() + 3);
  out.push_back(c.kind == ConstraintKind::AtMost ? vocab.at_most_marker()
                                                 : vocab.at_least_marker());
  out.push_back(static_cast<Token>(c.word_num / vocab.vocab_size));
  out.push_back(static_cast<Token>(c.word_num % vocab.vocab_size));
  out.insert(out.end(), p.base.begin(), p.base.end());
  return out;
}

inline AugmentedPrompt parse_prompt(const VocabLayout& vocab,
                                    const TokenSequence& tokens) {
  vocab.check_sequence(tokens);
  if (!tokens.empty() && (tokens[0] == vocab.at_most_marker() ||
                          tokens[0] == vocab.at_least_marker())) {
    if (tokens.size() < 3)
      throw std::invalid_argument("constraint header truncated");
    const ConstraintKind kind = tokens[0] == vocab.at_most_marker()
                                    ? ConstraintKind::AtMost
                                    : ConstraintKind::AtLeast;
    const int word_num = static_cast<int>(tokens[1]) * vocab.vocab_size +
                         static_cast<int>(tokens[2]);
    AugmentedPrompt p;
    p.base.assign(tokens.begin() + 3, tokens.end());
    p.constraint = LengthConstraint{kind, word_num};
    return p;
  }
  return AugmentedPrompt{tokens, std::nullopt};
}

// One response-conditioned comparison: same response under two prompts, the
// preferred one first. ChosenArm pairs a plain prompt against a constrained
// prompt the response violates; RejectedArm pairs a constrained prompt the
// response satisfies against the plain prompt.
enum class RcArm { ChosenArm, RejectedArm };

struct RcExample {
  AugmentedPrompt preferred_prompt;
  AugmentedPrompt dispreferred_prompt;
  TokenSequence response;
  RcArm arm;
};

}  // namespace rclab
