#pragma once

// Token-level vocabulary model. Responses and prompts are sequences of
// integer tokens drawn from a vocabulary of size V. The id space is split
// into bands:
//
//   [0, 3V/4)        content tokens: carry the semantic features the quality
//                    oracle reads
//   [3V/4, V-3)      filler tokens: invisible to the oracle, used to stretch
//                    a response without touching its meaning
//   V-3              canonical empty-prompt token
//   V-2              at-least constraint marker
//   V-1              at-most constraint marker
//
// Odd ids below V-3 carry the word-delimiter class, so word_count is a pure
// function of the token ids. Filler contains both word and non-word ids,
// which is what lets generators hit an exact word count.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rclab {

using Token = std::int32_t;
using TokenSequence = std::vector<Token>;

struct VocabLayout {
  int vocab_size;

  explicit VocabLayout(int v) : vocab_size(v) {
    if (v < 16 || v % 8 != 0)
      throw std::invalid_argument("vocab_size must be >= 16 and divisible by 8");
  }

  int content_end() const { return vocab_size * 3 / 4; }
  Token empty_prompt_token() const { return vocab_size - 3; }
  Token at_least_marker() const { return vocab_size - 2; }
  Token at_most_marker() const { return vocab_size - 1; }
  int filler_begin() const { return content_end(); }
  int filler_end() const { return vocab_size - 3; }

  bool is_content(Token t) const { return t >= 0 && t < content_end(); }
  bool is_filler(Token t) const {
    return t >= filler_begin() && t < filler_end();
  }
  bool is_word(Token t) const {
    return t >= 0 && t < vocab_size - 3 && (t % 2) == 1;
  }
  bool in_vocab(Token t) const { return t >= 0 && t < vocab_size; }

  void check_sequence(const TokenSequence& s) const {
    for (Token t : s)
      if (!in_vocab(t)) throw std::domain_error("token id outside vocabulary");
  }

  // Number of word-delimiter tokens; the |y| every length constraint reads.
  int word_count(const TokenSequence& s) const {
    int n = 0;
    for (Token t : s)
      if (is_word(t)) ++n;
    return n;
  }

  TokenSequence empty_prompt() const { return {empty_prompt_token()}; }

  // Largest word_num the two-digit header can carry.
  int max_word_num() const { return vocab_size * vocab_size - 1; }
};

}  // namespace rclab
