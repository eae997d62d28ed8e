#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sprl/data/instance.hpp"
#include "sprl/model/encoder.hpp"

namespace sprl {

/// Target-side vocabulary. Index 0 is the unknown token and index 1 the
/// start-of-sequence token.
class TargetVocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kBos = 1;

  TargetVocab() : TargetVocab(std::vector<std::string>{}) {}

  explicit TargetVocab(const std::vector<std::string>& words) {
    add("<unk>");
    add("<s>");
    for (const auto& w : words) add(w);
  }

  /// The `max_size - 2` most frequent target words (ties broken by spelling).
  static TargetVocab build(const std::vector<ParallelPair>& pairs, std::size_t max_size) {
    if (max_size < 3) throw ConfigError("target vocabulary must allow at least one word");
    std::map<std::string, std::size_t> freq;
    for (const auto& p : pairs)
      for (const auto& w : p.target) ++freq[w];
    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> words;
    for (const auto& [w, _] : items) {
      if (words.size() + 2 >= max_size) break;
      if (w == "<unk>" || w == "<s>") continue;
      words.push_back(w);
    }
    return TargetVocab(words);
  }

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::size_t index(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? kUnk : it->second;
  }

  /// Words after the two reserved entries.
  std::vector<std::string> content_words() const { return {words_.begin() + 2, words_.end()}; }

 private:
  void add(const std::string& w) {
    if (index_.count(w)) return;
    index_[w] = words_.size();
    words_.push_back(w);
  }

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AttentionResult {
  Var context;  // 2d
  Var weights;  // n, sums to 1
};

/// Dot-product attention of decoder state `s` over encoder states `states`
/// (n x 2d) through the projection (W_alpha, b_alpha): logits
/// s . (W_alpha h_t + b_alpha), weights softmax(logits), context
/// sum_t weights_t h_t. `projected` is states * W_alpha + b_alpha (n x D).
inline AttentionResult attend(Var s, Var states, Var projected) {
  if (states.value().rows() == 0) throw DomainError("attention over an empty sentence");
  Var weights = softmax(matmul_t(s, projected));
  return {matmul(weights, states), weights};
}

inline AttentionResult attention(Var s, Var states, Var w_alpha, Var b_alpha) {
  return attend(s, states, add_row(matmul(states, w_alpha), b_alpha));
}

/// Attention-based stacked-LSTM translation decoder used for encoder
/// pretraining. The decoder state width equals the encoder's per-direction
/// width, because the bottom layer starts from the encoder's last
/// left-to-right state.
class MtDecoder {
 public:
  MtDecoder(ParamStore& store, const std::string& prefix, TargetVocab vocab, std::size_t encoder_hidden,
            std::size_t embed_dim, std::size_t layers)
      : vocab_(std::move(vocab)), hidden_(encoder_hidden) {
    if (layers == 0) throw ConfigError("translation decoder needs at least one layer");
    embed_ = &store.add(prefix + ".E", {vocab_.size(), embed_dim});
    for (std::size_t l = 0; l < layers; ++l) {
      layers_.push_back(LstmWeights::create(store, prefix + ".layer" + std::to_string(l),
                                            l == 0 ? embed_dim : hidden_, hidden_));
    }
    w_alpha_ = &store.add(prefix + ".W_alpha", {2 * hidden_, hidden_});
    b_alpha_ = &store.add(prefix + ".b_alpha", {hidden_});
    w_fr_ = &store.add(prefix + ".W_fr", {3 * hidden_, vocab_.size()});
    b_fr_ = &store.add(prefix + ".b_fr", {vocab_.size()});
  }

  const TargetVocab& vocab() const noexcept { return vocab_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t embed_dim() const { return embed_->value.cols(); }
  std::size_t hidden_dim() const noexcept { return hidden_; }
  const LstmWeights& layer(std::size_t l) const { return layers_.at(l); }
  Parameter& embedding() const { return *embed_; }
  Parameter& w_alpha() const { return *w_alpha_; }
  Parameter& b_alpha() const { return *b_alpha_; }
  Parameter& w_fr() const { return *w_fr_; }
  Parameter& b_fr() const { return *b_fr_; }

  std::vector<Parameter*> parameters() const {
    std::vector<Parameter*> out{embed_};
    for (const auto& l : layers_) out.insert(out.end(), {l.wx, l.wh, l.b});
    out.insert(out.end(), {w_alpha_, b_alpha_, w_fr_, b_fr_});
    return out;
  }

  void initialize(Rng& rng) const {
    init_uniform(*embed_, 0.1, rng);
    for (const auto& l : layers_) l.initialize(rng);
    init_uniform(*w_alpha_, 1.0 / std::sqrt(static_cast<double>(2 * hidden_)), rng);
    b_alpha_->value.set_zero();
    init_uniform(*w_fr_, 1.0 / std::sqrt(static_cast<double>(3 * hidden_)), rng);
    b_fr_->value.set_zero();
  }

  /// Per-sentence quantities reused by every decoding step.
  struct Context {
    Var states;     // n x 2d
    Var projected;  // n x d
  };

  Context prepare(Graph& g, const EncodedSentence& enc) const {
    if (enc.states.value().cols() != 2 * hidden_) throw DimensionError("encoder width does not match decoder");
    return {enc.states, add_row(matmul(enc.states, g.param(*w_alpha_)), g.param(*b_alpha_))};
  }

  /// Bottom layer h starts at the encoder's last forward state; all other
  /// states start at zero.
  std::vector<LstmState> initial_state(Graph& g, const EncodedSentence& enc) const {
    std::vector<LstmState> s;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Var zero = g.input(Tensor({hidden_}));
      s.push_back({l == 0 ? enc.last_forward() : zero, zero});
    }
    return s;
  }

  struct Step {
    std::vector<LstmState> state;
    Var log_probs;
    Var distribution;
    AttentionResult attention;
  };

  /// Advances the stack on the embedding of `prev` and emits the next-token
  /// distribution softmax(tanh(W_fr [s; c] + b_fr)).
  Step step(Graph& g, std::size_t prev, const std::vector<LstmState>& state, const Context& ctx) const {
    if (state.size() != layers_.size()) throw DimensionError("decoder state has the wrong number of layers");
    if (prev >= vocab_.size()) prev = TargetVocab::kUnk;
    Step out;
    Var input = row(g.param(*embed_), prev);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      LstmState next = layers_[l].cell(g, input, state[l].h, state[l].c);
      out.state.push_back(next);
      input = next.h;
    }
    Var top = out.state.back().h;
    out.attention = attend(top, ctx.states, ctx.projected);
    Var z = tanh(add(matmul(concat({top, out.attention.context}), g.param(*w_fr_)), g.param(*b_fr_)));
    out.log_probs = log_softmax(z);
    out.distribution = softmax(z);
    return out;
  }

  Step step(Graph& g, const std::string& prev, const std::vector<LstmState>& state, const Context& ctx) const {
    return step(g, vocab_.index(prev), state, ctx);
  }

  /// Teacher-forced negative log-likelihood of `reference`, starting from
  /// the start-of-sequence token.
  Var sequence_loss(Graph& g, const EncodedSentence& enc, const std::vector<std::string>& reference) const {
    if (reference.empty()) throw DomainError("empty reference translation");
    const Context ctx = prepare(g, enc);
    auto state = initial_state(g, enc);
    std::size_t prev = TargetVocab::kBos;
    std::vector<Var> terms;
    for (const auto& word : reference) {
      Step s = step(g, prev, state, ctx);
      const std::size_t gold = vocab_.index(word);
      terms.push_back(pick(s.log_probs, gold));
      state = std::move(s.state);
      prev = gold;
    }
    return scale(sum(concat(terms)), -1.0);
  }

 private:
  TargetVocab vocab_;
  std::size_t hidden_;
  Parameter* embed_ = nullptr;
  std::vector<LstmWeights> layers_;
  Parameter* w_alpha_ = nullptr;
  Parameter* b_alpha_ = nullptr;
  Parameter* w_fr_ = nullptr;
  Parameter* b_fr_ = nullptr;
};

}  // namespace sprl
