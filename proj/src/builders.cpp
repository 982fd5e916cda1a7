#include "rclab/builders.hpp"

#include <algorithm>
#include <cmath>

namespace rclab {

namespace {

struct WordRange {
  int lo, hi;
  bool empty() const { return lo > hi; }
};

int sample(Rng& rng, const WordRange& r) {
  return static_cast<int>(rng.uniform_int(r.lo, r.hi));
}

// Ranges are truncated to +-50% of the response's own word count so sampled
// constraints stay in the response's vicinity.
WordRange violating_range(ConstraintKind kind, int len, int cap) {
  if (kind == ConstraintKind::AtMost)
    return {std::max(1, (len + 1) / 2), len - 1};
  return {len + 1, std::min(cap, len * 3 / 2)};
}

WordRange satisfying_range(ConstraintKind kind, int len, int cap) {
  if (kind == ConstraintKind::AtMost)
    return {len, std::min(cap, len * 3 / 2)};
  return {std::max(1, (len + 1) / 2), len};
}

ConstraintKind flip(ConstraintKind k) {
  return k == ConstraintKind::AtMost ? ConstraintKind::AtLeast
                                     : ConstraintKind::AtMost;
}

}  // namespace

RcBuildResult build_rc_dataset(const VocabLayout& vocab,
                               const PreferenceDataset& corpus,
                               std::uint64_t seed, const RcBuildConfig& config) {
  if (config.at_most_prob < 0.0 || config.at_most_prob > 1.0)
    throw std::invalid_argument("at_most_prob must lie in [0, 1]");
  if (config.word_num_cap_factor < 1.0)
    throw std::invalid_argument("word_num_cap_factor must be >= 1");

  int longest = 0;
  for (const auto& ex : corpus)
    longest = std::max({longest, vocab.word_count(ex.chosen),
                        vocab.word_count(ex.rejected)});
  const int cap = std::min(
      vocab.max_word_num(),
      static_cast<int>(std::ceil(config.word_num_cap_factor * longest)));

  RcBuildResult out;
  out.examples.reserve(corpus.size() * 2);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& ex = corpus[i];
    Rng rng(derive_seed(seed, "augment", i));

    auto draw = [&](int len, bool violating) -> std::optional<LengthConstraint> {
      ConstraintKind kind = rng.bernoulli(config.at_most_prob)
                                ? ConstraintKind::AtMost
                                : ConstraintKind::AtLeast;
      for (int attempt = 0; attempt < 2; ++attempt, kind = flip(kind)) {
        const WordRange r = violating ? violating_range(kind, len, cap)
                                      : satisfying_range(kind, len, cap);
        if (!r.empty())
          return make_constraint(vocab, kind, sample(rng, r));
      }
      return std::nullopt;
    };

    if (auto c = draw(vocab.word_count(ex.chosen), true)) {
      RcExample rc;
      rc.preferred_prompt = AugmentedPrompt{ex.prompt.base, std::nullopt};
      rc.dispreferred_prompt = AugmentedPrompt{ex.prompt.base, c};
      rc.response = ex.chosen;
      rc.arm = RcArm::ChosenArm;
      out.examples.push_back(std::move(rc));
    } else {
      ++out.skipped;
    }

    if (auto c = draw(vocab.word_count(ex.rejected), false)) {
      RcExample rc;
      rc.preferred_prompt = AugmentedPrompt{ex.prompt.base, c};
      rc.dispreferred_prompt = AugmentedPrompt{ex.prompt.base, std::nullopt};
      rc.response = ex.rejected;
      rc.arm = RcArm::RejectedArm;
      out.examples.push_back(std::move(rc));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

PreferenceDataset build_lift_plus(const VocabLayout& vocab,
                                  const PreferenceDataset& corpus,
                                  std::uint64_t seed, LiftVariant variant) {
  PreferenceDataset out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& ex = corpus[i];
    Rng rng(derive_seed(seed, "lift", i));
    const int a = vocab.word_count(ex.chosen);
    const int b = vocab.word_count(ex.rejected);
    const int shorter = std::min(a, b), longer = std::max(a, b);

    // One instruction per kind, word_num drawn so at least one response
    // always satisfies it.
    for (ConstraintKind kind : {ConstraintKind::AtMost, ConstraintKind::AtLeast}) {
      int wn;
      if (kind == ConstraintKind::AtMost)
        wn = static_cast<int>(rng.uniform_int(
            shorter, std::min(vocab.max_word_num(), longer * 3 / 2)));
      else
        wn = static_cast<int>(rng.uniform_int(std::max(1, shorter / 2), longer));

      const auto c = make_constraint(vocab, kind, wn);
      const bool chosen_ok = c.satisfied_by(vocab, ex.chosen);
      const bool rejected_ok = c.satisfied_by(vocab, ex.rejected);
      const bool one_side = chosen_ok != rejected_ok;
      const bool flipped = one_side && rejected_ok;

      if (variant == LiftVariant::Reverse && !flipped) continue;
      if ((variant == LiftVariant::NoReverse ||
           variant == LiftVariant::EmptyPrompt) &&
          !(one_side && !flipped))
        continue;

      PreferenceExample le;
      le.prompt.base = variant == LiftVariant::EmptyPrompt ? vocab.empty_prompt()
                                                           : ex.prompt.base;
      le.prompt.constraint = c;
      le.chosen = flipped ? ex.rejected : ex.chosen;
      le.rejected = flipped ? ex.chosen : ex.rejected;
      out.push_back(std::move(le));
    }
  }
  return out;
}

PreferenceDataset build_eval_empty(const VocabLayout& vocab,
                                   const PreferenceDataset& eval_corpus) {
  PreferenceDataset out;
  out.reserve(eval_corpus.size());
  for (const auto& ex : eval_corpus) {
    PreferenceExample e;
    e.prompt = AugmentedPrompt{vocab.empty_prompt(), std::nullopt};
    e.chosen = ex.chosen;
    e.rejected = ex.rejected;
    out.push_back(std::move(e));
  }
  return out;
}

PreferenceDataset build_eval_random(const VocabLayout& vocab,
                                    const PreferenceDataset& eval_corpus,
                                    std::uint64_t seed) {
  (void)vocab;
  if (eval_corpus.size() < 2)
    throw std::invalid_argument("derangement needs at least two examples");
  Rng rng(derive_seed(seed, "eval-random"));
  const auto perm = rng.derangement(eval_corpus.size());
  PreferenceDataset out;
  out.reserve(eval_corpus.size());
  for (std::size_t i = 0; i < eval_corpus.size(); ++i) {
    PreferenceExample e;
    e.prompt = eval_corpus[perm[i]].prompt;
    e.chosen = eval_corpus[i].chosen;
    e.rejected = eval_corpus[i].rejected;
    out.push_back(std::move(e));
  }
  return out;
}

LengthEvalResult build_eval_length(const VocabLayout& vocab,
                                   const QualityOracle& oracle,
                                   const PreferenceDataset& eval_corpus,
                                   std::uint64_t seed) {
  (void)oracle;  // scores are preserved exactly by construction
  LengthEvalResult out;
  for (std::size_t i = 0; i < eval_corpus.size(); ++i) {
    const auto& ex = eval_corpus[i];
    Rng rng(derive_seed(seed, "eval-length", i));
    const int len1 = vocab.word_count(ex.chosen);
    const int floor_words =
        std::max(content_word_count(vocab, ex.chosen), std::max(1, (len1 + 1) / 2));
    const int hi = len1 * 3 / 2;
    // Candidate second lengths: [floor_words, hi] minus len1 itself.
    int span = hi - floor_words + 1;
    const bool len1_inside = len1 >= floor_words && len1 <= hi;
    if (len1_inside) --span;
    if (span < 1) {
      ++out.skipped;
      continue;
    }
    int len2 = floor_words + static_cast<int>(rng.uniform_int(0, span - 1));
    if (len1_inside && len2 >= len1) ++len2;

    const TokenSequence resp2 = repad_response(vocab, rng, ex.chosen, len2);
    const int lo = std::min(len1, len2), hi_len = std::max(len1, len2);
    const ConstraintKind kind = rng.bernoulli(0.5) ? ConstraintKind::AtMost
                                                   : ConstraintKind::AtLeast;
    const int wn = kind == ConstraintKind::AtMost
                       ? static_cast<int>(rng.uniform_int(lo, hi_len - 1))
                       : static_cast<int>(rng.uniform_int(lo + 1, hi_len));
    const auto c = make_constraint(vocab, kind, wn);

    const bool first_is_short = len1 == lo;
    const TokenSequence& short_resp = first_is_short ? ex.chosen : resp2;
    const TokenSequence& long_resp = first_is_short ? resp2 : ex.chosen;

    PreferenceExample e;
    e.prompt = AugmentedPrompt{ex.prompt.base, c};
    if (kind == ConstraintKind::AtMost) {
      e.chosen = short_resp;
      e.rejected = long_resp;
    } else {
      e.chosen = long_resp;
      e.rejected = short_resp;
    }
    out.examples.push_back(std::move(e));
  }
  return out;
}

MultiLengthDataset build_eval_multilength(const VocabLayout& vocab,
                                          const PreferenceDataset& eval_corpus,
                                          int n_variants, std::uint64_t seed) {
  if (n_variants < 1) throw std::invalid_argument("n_variants must be >= 1");
  MultiLengthDataset out;
  out.reserve(eval_corpus.size());
  for (std::size_t i = 0; i < eval_corpus.size(); ++i) {
    const auto& ex = eval_corpus[i];
    MultiLengthExample me;
    me.prompt = ex.prompt;
    if (n_variants == 1) {
      me.variants.push_back(ex.chosen);
    } else {
      Rng rng(derive_seed(seed, "eval-ml", i));
      const int len1 = vocab.word_count(ex.chosen);
      const int start = std::max(content_word_count(vocab, ex.chosen),
                                 std::max(1, (len1 + 1) / 2));
      const int step = std::max(1, (len1 + 2) / 4);
      for (int j = 0; j < n_variants; ++j)
        me.variants.push_back(
            repad_response(vocab, rng, ex.chosen, start + j * step));
    }
    out.push_back(std::move(me));
  }
  return out;
}

std::array<int, kSweepPoints> sweep_word_nums(int len_chosen, int len_rejected) {
  if (len_chosen >= len_rejected)
    throw std::invalid_argument("sweep needs the chosen response shorter");
  if (len_chosen <= 2 * kSweepT)
    throw std::invalid_argument("chosen response too short for the ladder");
  const int diff = len_rejected - len_chosen;
  const int spacing = (2 * diff + 3) / 6;  // round((l_l - l_w)/3), thirds never tie
  const std::array<int, kSweepPoints> wn = {
      len_chosen - 2 * kSweepT, len_chosen - kSweepT,
      len_chosen,               len_chosen + spacing,
      len_chosen + 2 * spacing, len_rejected,
      len_rejected + kSweepT,   len_rejected + 2 * kSweepT};
  for (int j = 1; j < kSweepPoints; ++j)
    if (wn[j] <= wn[j - 1])
      throw std::domain_error("sweep ladder not strictly increasing");
  return wn;
}

std::vector<AugmentedPrompt> build_mls_sweep(const VocabLayout& vocab,
                                             const PreferenceExample& example) {
  const auto wn = sweep_word_nums(vocab.word_count(example.chosen),
                                  vocab.word_count(example.rejected));
  std::vector<AugmentedPrompt> out;
  out.reserve(kSweepPoints);
  for (int w : wn)
    out.push_back(AugmentedPrompt{
        example.prompt.base, make_constraint(vocab, ConstraintKind::AtMost, w)});
  return out;
}

SweepDataset build_mls_dataset(const VocabLayout& vocab,
                               const PreferenceDataset& eval_corpus) {
  SweepDataset out;
  for (const auto& ex : eval_corpus) {
    const int lw = vocab.word_count(ex.chosen);
    const int ll = vocab.word_count(ex.rejected);
    if (lw >= ll || lw <= 2 * kSweepT || ll - lw < 3) {
      ++out.skipped;
      continue;
    }
    SweepExample se;
    se.base = ex.prompt.base;
    se.word_nums = sweep_word_nums(lw, ll);
    se.chosen = ex.chosen;
    se.rejected = ex.rejected;
    out.examples.push_back(std::move(se));
  }
  return out;
}

}  // namespace rclab
