#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sprl/core/lstm.hpp"
#include "sprl/data/embeddings.hpp"
#include "sprl/model/params.hpp"

namespace sprl {

struct EncoderConfig {
  std::size_t input_dim = kDefaultEmbeddingDim;
  std::size_t hidden_dim = 600;  // per direction
};

/// Weights of one LSTM direction: Wx (in x 4d), Wh (d x 4d), b (4d).
struct LstmWeights {
  Parameter* wx = nullptr;
  Parameter* wh = nullptr;
  Parameter* b = nullptr;

  static LstmWeights create(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                            std::size_t hidden_dim) {
    LstmWeights w;
    w.wx = &store.add(prefix + ".Wx", {input_dim, 4 * hidden_dim});
    w.wh = &store.add(prefix + ".Wh", {hidden_dim, 4 * hidden_dim});
    w.b = &store.add(prefix + ".b", {4 * hidden_dim});
    return w;
  }

  std::size_t hidden_dim() const { return wh->value.rows(); }

  /// Uniform in [-1/sqrt(d), 1/sqrt(d)], forget-gate bias 1.
  void initialize(Rng& rng) const {
    const std::size_t d = hidden_dim();
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    init_uniform(*wx, s, rng);
    init_uniform(*wh, s, rng);
    init_uniform(*b, s, rng);
    for (std::size_t j = d; j < 2 * d; ++j) b->value[j] = 1.0;
  }

  LstmState cell(Graph& g, Var x, Var h, Var c) const {
    return lstm_cell(x, h, c, g.param(*wx), g.param(*wh), g.param(*b));
  }
};

/// Hidden states of one sentence. Row t of `states` is
/// [forward_h(t); backward_h(t)].
struct EncodedSentence {
  Var states;
  Var forward;
  Var backward;
  std::size_t length = 0;

  Var last_forward() const { return row(forward, length - 1); }
};

/// Shared one-layer bidirectional LSTM sentence encoder.
class Encoder {
 public:
  Encoder(ParamStore& store, EncoderConfig config, const std::string& prefix = "encoder")
      : config_(config),
        fwd_(LstmWeights::create(store, prefix + ".fwd", config.input_dim, config.hidden_dim)),
        bwd_(LstmWeights::create(store, prefix + ".bwd", config.input_dim, config.hidden_dim)) {
    if (config.input_dim == 0 || config.hidden_dim == 0) throw ConfigError("encoder dimensions must be positive");
  }

  const EncoderConfig& config() const noexcept { return config_; }
  std::size_t state_dim() const noexcept { return 2 * config_.hidden_dim; }
  const LstmWeights& forward_weights() const noexcept { return fwd_; }
  const LstmWeights& backward_weights() const noexcept { return bwd_; }

  std::vector<Parameter*> parameters() const { return {fwd_.wx, fwd_.wh, fwd_.b, bwd_.wx, bwd_.wh, bwd_.b}; }

  void initialize(Rng& rng) const {
    fwd_.initialize(rng);
    bwd_.initialize(rng);
  }

  /// Encodes an n x input_dim embedding matrix.
  EncodedSentence encode(Graph& g, const Tensor& embeddings) const {
    if (embeddings.rank() != 2 || embeddings.cols() != config_.input_dim) {
      throw DimensionError("encode: embeddings " + shape_string(embeddings.shape()) + " do not have " +
                           std::to_string(config_.input_dim) + " columns");
    }
    Var x = g.input(embeddings);
    EncodedSentence out;
    out.length = embeddings.rows();
    out.forward = lstm_sequence(x, g.param(*fwd_.wx), g.param(*fwd_.wh), g.param(*fwd_.b), false);
    out.backward = lstm_sequence(x, g.param(*bwd_.wx), g.param(*bwd_.wh), g.param(*bwd_.b), true);
    out.states = concat({out.forward, out.backward});
    return out;
  }

  EncodedSentence encode(Graph& g, const std::vector<std::string>& tokens, const EmbeddingTable& table) const {
    if (tokens.empty()) throw DomainError("cannot encode an empty sentence");
    return encode(g, table.lookup(tokens));
  }

 private:
  EncoderConfig config_;
  LstmWeights fwd_;
  LstmWeights bwd_;
};

/// h_ea = [h_e; h_a].
inline Var pair_state(const EncodedSentence& s, std::size_t e, std::size_t a) {
  for (std::size_t idx : {e, a}) {
    if (idx >= s.length) {
      throw BoundsError("head index " + std::to_string(idx) + " out of range for sentence of length " +
                        std::to_string(s.length));
    }
  }
  return concat({row(s.states, e), row(s.states, a)});
}

}  // namespace sprl
