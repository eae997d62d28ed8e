#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "sprl/core/random.hpp"
#include "sprl/data/instance.hpp"

namespace sprl {

/// Properties of the generated dataset, each a deterministic function of the
/// tokens and the two head positions.
inline const std::vector<std::string>& synthetic_properties() {
  static const std::vector<std::string> names{"action_pred", "animate", "instrument", "negated", "precedes", "volition"};
  return names;
}

namespace detail {

inline constexpr std::array<const char*, 16> kAnimate{"man",    "woman",  "dog",     "teacher", "child",  "farmer",
                                                      "doctor", "cat",    "soldier", "pilot",   "horse",  "student",
                                                      "nurse",  "singer", "driver",  "girl"};
inline constexpr std::array<const char*, 16> kInanimate{"rock",  "table", "hammer", "book",   "car",    "river",
                                                        "knife", "bread", "window", "stone",  "letter", "bottle",
                                                        "chair", "rope",  "coin",   "mirror"};
inline constexpr std::array<const char*, 12> kActionVerbs{"kicked", "built",  "threw",   "carried", "pushed", "broke",
                                                          "wrote",  "opened", "painted", "cut",     "lifted", "moved"};
inline constexpr std::array<const char*, 12> kStateVerbs{"resembled", "contained", "lacked",  "owned",
                                                         "knew",      "seemed",    "matched", "deserved",
                                                         "equaled",   "suited",    "held",    "remained"};
inline constexpr std::array<const char*, 8> kModifiers{"old", "small", "red", "quiet", "heavy", "young", "bright", "tall"};

template <std::size_t N>
const char* pick(const std::array<const char*, N>& words, Rng& rng) {
  return words[rng.below(N)];
}

struct NounPhrase {
  std::vector<std::string> tokens;
  std::size_t head = 0;  // offset within tokens
  bool animate = false;
};

inline NounPhrase noun_phrase(Rng& rng) {
  NounPhrase np;
  if (rng.bernoulli(0.3)) np.tokens.push_back(pick(kModifiers, rng));
  np.animate = rng.bernoulli(0.5);
  np.head = np.tokens.size();
  np.tokens.push_back(np.animate ? pick(kAnimate, rng) : pick(kInanimate, rng));
  return np;
}

}  // namespace detail

/// One clause "NP [not] V NP [with|near NP]", NP = [modifier] noun, with the verb as predicate and
/// one of the noun heads as argument.
///   animate     argument head is an animate noun
///   action_pred predicate is an action verb
///   volition    animate and action_pred
///   precedes    argument comes before the predicate
///   negated     "not" directly precedes the predicate
///   instrument  argument is the object of "with"
inline Instance synthetic_instance(Rng& rng, const std::string& sentence_id) {
  using namespace detail;
  Instance in;
  in.sentence_id = sentence_id;
  std::vector<std::size_t> heads;
  std::vector<bool> animate;
  auto append = [&](const NounPhrase& np) {
    heads.push_back(in.tokens.size() + np.head);
    animate.push_back(np.animate);
    in.tokens.insert(in.tokens.end(), np.tokens.begin(), np.tokens.end());
  };
  append(noun_phrase(rng));
  const bool negated = rng.bernoulli(0.5);
  if (negated) in.tokens.push_back("not");
  else if (rng.bernoulli(0.2)) in.tokens.push_back(rng.bernoulli(0.5) ? "often" : "then");
  const bool action = rng.bernoulli(0.5);
  in.pred_head = in.tokens.size();
  in.tokens.push_back(action ? pick(kActionVerbs, rng) : pick(kStateVerbs, rng));
  append(noun_phrase(rng));
  std::size_t with_index = std::numeric_limits<std::size_t>::max();
  if (rng.bernoulli(0.5)) {
    const bool with = rng.bernoulli(0.5);
    in.tokens.push_back(with ? "with" : "near");
    if (with) with_index = heads.size();
    append(noun_phrase(rng));
  }
  const std::size_t which = rng.below(heads.size());
  in.arg_head = heads[which];
  in.labels.insert_or_assign("animate", animate[which]);
  in.labels.insert_or_assign("action_pred", action);
  in.labels.insert_or_assign("volition", animate[which] && action);
  in.labels.insert_or_assign("precedes", in.arg_head < in.pred_head);
  in.labels.insert_or_assign("negated", negated);
  in.labels.insert_or_assign("instrument", which == with_index);
  return in;
}

struct SyntheticSplits {
  std::vector<Instance> train, dev, test;
};

/// `n` generated instances split 80/10/10 in generation order.
inline SyntheticSplits synthetic_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticSplits out;
  const std::size_t n_train = n * 8 / 10, n_dev = n / 10;
  for (std::size_t i = 0; i < n; ++i) {
    Instance in = synthetic_instance(rng, "syn" + std::to_string(i));
    if (i < n_train) out.train.push_back(std::move(in));
    else if (i < n_train + n_dev) out.dev.push_back(std::move(in));
    else out.test.push_back(std::move(in));
  }
  return out;
}

/// Every token the generator can emit.
inline std::set<std::string> synthetic_vocabulary() {
  using namespace detail;
  std::set<std::string> v{"not", "often", "then", "with", "near"};
  for (const auto* list : {kAnimate.data(), kInanimate.data()})
    for (std::size_t i = 0; i < 16; ++i) v.insert(list[i]);
  for (const auto* list : {kActionVerbs.data(), kStateVerbs.data()})
    for (std::size_t i = 0; i < 12; ++i) v.insert(list[i]);
  v.insert(kModifiers.begin(), kModifiers.end());
  return v;
}

/// Writes a "token v1 ... v_dim" embedding file for `vocabulary`, values
/// uniform in [-0.5, 0.5).
inline void write_synthetic_embeddings(const std::string& path, const std::set<std::string>& vocabulary,
                                       std::size_t dim, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings " + path);
  Rng rng(seed);
  char buf[32];
  for (const auto& token : vocabulary) {
    out << token;
    for (std::size_t k = 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, " %.6f", rng.uniform(-0.5, 0.5));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing embeddings " + path);
}

}  // namespace sprl
