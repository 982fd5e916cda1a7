#include "rclab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rclab/parallel.hpp"

namespace rclab {

QualityOracle::QualityOracle(const VocabLayout& vocab, std::uint64_t seed)
    : vocab_(vocab), seed_(seed), dim_(vocab.content_end()) {
  Rng rng(derive_seed(seed, "oracle"));
  weights_.resize(static_cast<std::size_t>(dim_) * dim_);
  for (auto& w : weights_) w = rng.normal();
}

double QualityOracle::score(const TokenSequence& prompt,
                            const TokenSequence& response) const {
  vocab_.check_sequence(prompt);
  vocab_.check_sequence(response);
  std::vector<double> hp(dim_, 0.0), hy(dim_, 0.0);
  double np = 0.0, ny = 0.0;
  for (Token t : prompt)
    if (vocab_.is_content(t)) hp[t] += 1.0, np += 1.0;
  for (Token t : response)
    if (vocab_.is_content(t)) hy[t] += 1.0, ny += 1.0;
  if (np == 0.0 || ny == 0.0) return 0.0;
  double q = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (hp[i] == 0.0) continue;
    const double* row = &weights_[static_cast<std::size_t>(i) * dim_];
    double acc = 0.0;
    for (int j = 0; j < dim_; ++j) acc += row[j] * hy[j];
    q += hp[i] * acc;
  }
  return q / (np * ny);
}

void validate(const CorpusSpec& spec) {
  if (spec.n_examples < 0)
    throw std::invalid_argument("n_examples must be non-negative");
  if (spec.chosen_longer_prob < 0.0 || spec.chosen_longer_prob > 1.0)
    throw std::invalid_argument("chosen_longer_prob must lie in [0, 1]");
  VocabLayout vocab(spec.vocab_size);
  if (vocab.filler_end() - vocab.filler_begin() < 2)
    throw std::invalid_argument(
        "vocab_size too small: filler band needs word and non-word ids");
  if (spec.prompt_len_range.min < 1 ||
      spec.prompt_len_range.max < spec.prompt_len_range.min)
    throw std::invalid_argument("prompt_len_range is empty or non-positive");
  if (spec.response_len_range.min < 1 ||
      spec.response_len_range.max < spec.response_len_range.min)
    throw std::invalid_argument("response_len_range is empty or non-positive");
  if (spec.response_len_range.max == spec.response_len_range.min)
    throw std::invalid_argument(
        "response_len_range must span at least two word counts");
}

namespace {

Token draw_content(const VocabLayout& vocab, Rng& rng) {
  return static_cast<Token>(rng.uniform_int(0, vocab.content_end() - 1));
}

Token draw_filler(const VocabLayout& vocab, Rng& rng, bool word) {
  // Filler band ids alternate even/odd; pick within the right parity.
  const int lo = vocab.filler_begin(), hi = vocab.filler_end() - 1;
  for (;;) {
    const Token t = static_cast<Token>(rng.uniform_int(lo, hi));
    if (vocab.is_word(t) == word) return t;
  }
}

// A handful of content ids: the semantic payload. At most max_words of them
// are word-class.
TokenSequence make_content_segment(const VocabLayout& vocab, Rng& rng,
                                   int max_words) {
  const int words = static_cast<int>(
      rng.uniform_int(std::min<std::int64_t>(2, max_words),
                      std::min<std::int64_t>(6, max_words)));
  const int plain = static_cast<int>(rng.uniform_int(4, 12));
  TokenSequence seg;
  seg.reserve(static_cast<std::size_t>(words + plain));
  for (int i = 0; i < words; ++i) {
    Token t = draw_content(vocab, rng);
    seg.push_back(vocab.is_word(t) ? t : static_cast<Token>(t | 1));
  }
  for (int i = 0; i < plain; ++i) {
    Token t = draw_content(vocab, rng);
    seg.push_back(vocab.is_word(t) ? static_cast<Token>(t & ~1) : t);
  }
  rng.shuffle(seg);
  return seg;
}

TokenSequence pad_to_words(const VocabLayout& vocab, Rng& rng,
                           TokenSequence content, int target_words) {
  const int have = vocab.word_count(content);
  if (have > target_words)
    throw std::invalid_argument("pad_to_words: content already exceeds target");
  const int decorative = static_cast<int>(rng.uniform_int(0, 8));
  content.reserve(content.size() +
                  static_cast<std::size_t>(target_words - have + decorative));
  for (int i = 0; i < target_words - have; ++i)
    content.push_back(draw_filler(vocab, rng, true));
  for (int i = 0; i < decorative; ++i)
    content.push_back(draw_filler(vocab, rng, false));
  return content;
}

}  // namespace

TokenSequence make_response(const VocabLayout& vocab, Rng& rng,
                            int target_words) {
  if (target_words < 1)
    throw std::invalid_argument("make_response: target_words must be >= 1");
  return pad_to_words(vocab, rng, make_content_segment(vocab, rng, target_words),
                      target_words);
}

int content_word_count(const VocabLayout& vocab, const TokenSequence& response) {
  int n = 0;
  for (Token t : response)
    if (vocab.is_content(t) && vocab.is_word(t)) ++n;
  return n;
}

TokenSequence repad_response(const VocabLayout& vocab, Rng& rng,
                             const TokenSequence& response, int target_words) {
  TokenSequence content;
  content.reserve(response.size());
  for (Token t : response)
    if (vocab.is_content(t)) content.push_back(t);
  return pad_to_words(vocab, rng, std::move(content), target_words);
}

PreferenceDataset generate_corpus(const CorpusSpec& spec, int threads) {
  validate(spec);
  const VocabLayout vocab(spec.vocab_size);
  const QualityOracle oracle(vocab, spec.seed);
  PreferenceDataset out(static_cast<std::size_t>(spec.n_examples));

  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(spec.seed, "corpus", i));
    const bool chosen_longer = rng.bernoulli(spec.chosen_longer_prob);

    const int plen = static_cast<int>(rng.uniform_int(
        spec.prompt_len_range.min, spec.prompt_len_range.max));
    TokenSequence prompt(static_cast<std::size_t>(plen));
    for (auto& t : prompt) t = draw_content(vocab, rng);

    int w1 = static_cast<int>(rng.uniform_int(spec.response_len_range.min,
                                              spec.response_len_range.max));
    int w2 = w1;
    while (w2 == w1)
      w2 = static_cast<int>(rng.uniform_int(spec.response_len_range.min,
                                            spec.response_len_range.max));
    const int max_words = std::min(w1, w2);

    TokenSequence seg_a = make_content_segment(vocab, rng, max_words);
    TokenSequence seg_b = make_content_segment(vocab, rng, max_words);
    double qa = oracle.score(prompt, seg_a);
    double qb = oracle.score(prompt, seg_b);
    while (qa == qb) {
      seg_b = make_content_segment(vocab, rng, max_words);
      qb = oracle.score(prompt, seg_b);
    }
    if (qa < qb) {
      std::swap(seg_a, seg_b);
      std::swap(qa, qb);
    }

    const int w_chosen = chosen_longer ? std::max(w1, w2) : std::min(w1, w2);
    const int w_rejected = chosen_longer ? std::min(w1, w2) : std::max(w1, w2);

    PreferenceExample ex;
    ex.prompt = AugmentedPrompt{std::move(prompt), std::nullopt};
    ex.chosen = pad_to_words(vocab, rng, std::move(seg_a), w_chosen);
    ex.rejected = pad_to_words(vocab, rng, std::move(seg_b), w_rejected);
    ex.true_quality_chosen = qa;
    ex.true_quality_rejected = qb;
    out[i] = std::move(ex);
  });
  return out;
}

CorpusSplits split_corpus(const PreferenceDataset& corpus,
                          const SplitFractions& fractions, std::uint64_t seed) {
  const double f[3] = {fractions.sft, fractions.rm, fractions.eval};
  double sum = 0.0;
  for (double v : f) {
    if (v < 0.0) throw std::invalid_argument("split fractions must be >= 0");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");

  const std::size_t n = corpus.size();
  std::size_t sizes[3];
  double rem[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = f[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-12));
    rem[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (rem[k] > rem[best]) best = k;
    ++sizes[best];
    rem[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(order);

  CorpusSplits splits;
  PreferenceDataset* parts[3] = {&splits.sft, &splits.rm, &splits.eval};
  std::size_t cursor = 0;
  for (int k = 0; k < 3; ++k) {
    std::vector<std::size_t> idx(order.begin() + cursor,
                                 order.begin() + cursor + sizes[k]);
    std::sort(idx.begin(), idx.end());
    parts[k]->reserve(idx.size());
    for (std::size_t j : idx) parts[k]->push_back(corpus[j]);
    cursor += sizes[k];
  }
  return splits;
}

double chosen_longer_fraction(const VocabLayout& vocab,
                              const PreferenceDataset& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  std::size_t longer = 0;
  for (const auto& ex : data)
    if (vocab.word_count(ex.chosen) > vocab.word_count(ex.rejected)) ++longer;
  return static_cast<double>(longer) / static_cast<double>(data.size());
}

double quality_length_correlation(const VocabLayout& vocab,
                                  const PreferenceDataset& data) {
  std::vector<double> dq, dl;
  for (const auto& ex : data) {
    if (!ex.true_quality_chosen || !ex.true_quality_rejected) continue;
    dq.push_back(*ex.true_quality_chosen - *ex.true_quality_rejected);
    dl.push_back(static_cast<double>(vocab.word_count(ex.chosen) -
                                     vocab.word_count(ex.rejected)));
  }
  const std::size_t n = dq.size();
  if (n < 2)
    throw std::invalid_argument("need at least two labeled examples");
  double mq = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < n; ++i) mq += dq[i], ml += dl[i];
  mq /= static_cast<double>(n);
  ml /= static_cast<double>(n);
  double num = 0.0, vq = 0.0, vl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (dq[i] - mq) * (dl[i] - ml);
    vq += (dq[i] - mq) * (dq[i] - mq);
    vl += (dl[i] - ml) * (dl[i] - ml);
  }
  if (vq == 0.0 || vl == 0.0)
    throw std::invalid_argument("zero variance in quality or length deltas");
  return num / std::sqrt(vq * vl);
}

}  // namespace rclab
