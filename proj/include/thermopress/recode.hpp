#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thermopress/sft.hpp"

namespace thermopress {

/// Higher-block presentation: the target alphabet is the set of admissible
/// B-words of the source, with a transition u -> v exactly when the blocks
/// overlap (u[1:] == v[:-1]). Words of length n >= B translate to target
/// words of length n - B + 1 and back; round trips are the identity.
struct BlockRecoding {
  int block_len = 1;
  SftModel source;
  SftModel target;
  std::vector<Word> blocks;        // target symbol -> source B-word
  std::vector<int> block_index;    // dense m^B -> target symbol (or -1)

  bool is_identity() const { return block_len == 1; }

  Symbol block_symbol(std::span<const Symbol> w) const {
    std::size_t idx = 0;
    for (int t = 0; t < block_len; ++t)
      idx = idx * static_cast<std::size_t>(source.alphabet_size()) + w[t];
    int s = block_index[idx];
    if (s < 0) throw std::invalid_argument("inadmissible source block");
    return s;
  }

  Word recode_word(const Word& w) const {
    if (w.length() < block_len)
      throw std::invalid_argument("word shorter than block length");
    Word out;
    out.symbols.reserve(w.length() - block_len + 1);
    for (int t = 0; t + block_len <= w.length(); ++t)
      out.symbols.push_back(
          block_symbol(std::span<const Symbol>(w.symbols.data() + t, block_len)));
    return out;
  }

  Word decode_word(const Word& w) const {
    if (w.length() < 1) throw std::invalid_argument("empty word");
    Word out = blocks[w.symbols[0]];
    for (int t = 1; t < w.length(); ++t)
      out.symbols.push_back(blocks[w.symbols[t]].symbols.back());
    return out;
  }

  /// Presents f (source depth <= block_len + 1) as a depth-2 function on the
  /// target; f is first lifted to the common depth block_len + 1, so Birkhoff
  /// sums of the result on recoded words equal those of the lifted function.
  LocallyConstantFn recode_fn(const LocallyConstantFn& f) const {
    const int k = block_len + 1;
    if (f.depth() > k)
      throw std::invalid_argument("function depth exceeds block length + 1");
    if (is_identity()) {
      // depth <= 2 already; keep the native presentation
      return f;
    }
    LocallyConstantFn out(target, 2, 0.0);
    std::vector<Symbol> pair(2);
    std::vector<Symbol> src_word(k);
    for (Symbol a = 0; a < target.alphabet_size(); ++a) {
      for (Symbol b : target.successors(a)) {
        for (int t = 0; t < block_len; ++t) src_word[t] = blocks[a].symbols[t];
        src_word[block_len] = blocks[b].symbols.back();
        pair[0] = a;
        pair[1] = b;
        out.set(pair, f.value(std::span<const Symbol>(src_word.data(), f.depth())));
      }
    }
    return out;
  }
};

inline BlockRecoding higher_block(const SftModel& model, int block_len) {
  if (block_len < 1) throw std::invalid_argument("block length must be >= 1");
  if (block_len == 1) {
    std::vector<int> identity(model.alphabet_size());
    for (int i = 0; i < model.alphabet_size(); ++i) identity[i] = i;
    return BlockRecoding{1, model, model, enumerate_words(model, 1), std::move(identity)};
  }
  std::vector<Word> blocks = enumerate_words(model, block_len);
  std::size_t dense = 1;
  for (int i = 0; i < block_len; ++i) dense *= static_cast<std::size_t>(model.alphabet_size());
  std::vector<int> index(dense, -1);
  for (int s = 0; s < static_cast<int>(blocks.size()); ++s) {
    std::size_t idx = 0;
    for (Symbol x : blocks[s].symbols)
      idx = idx * static_cast<std::size_t>(model.alphabet_size()) + x;
    index[idx] = s;
  }
  const int mb = static_cast<int>(blocks.size());
  std::vector<std::vector<int>> adj(mb, std::vector<int>(mb, 0));
  for (int u = 0; u < mb; ++u) {
    for (int v = 0; v < mb; ++v) {
      bool overlap = true;
      for (int t = 0; t + 1 < block_len; ++t)
        if (blocks[u].symbols[t + 1] != blocks[v].symbols[t]) { overlap = false; break; }
      // the glued (B+1)-word is admissible iff both blocks are and they overlap
      if (overlap && model.admissible(blocks[u].symbols.back(), blocks[v].symbols.back()))
        adj[u][v] = 1;
    }
  }
  std::vector<std::string> labels(mb);
  for (int s = 0; s < mb; ++s) labels[s] = blocks[s].str();
  SftModel target(mb, adj, labels);
  return BlockRecoding{block_len, model, std::move(target), std::move(blocks),
                       std::move(index)};
}

/// Re-presents the model so that every function in `fns` has depth <= 2:
/// block length max(1, max_depth - 1). Depth <= 2 inputs return the identity
/// recoding with the functions untouched.
inline std::pair<BlockRecoding, std::vector<LocallyConstantFn>> recode_to_depth2(
    const SftModel& model, const std::vector<LocallyConstantFn>& fns) {
  int k = 1;
  for (const auto& f : fns) k = std::max(k, f.depth());
  BlockRecoding rec = higher_block(model, std::max(1, k - 1));
  std::vector<LocallyConstantFn> out;
  out.reserve(fns.size());
  for (const auto& f : fns) out.push_back(rec.recode_fn(f));
  return {std::move(rec), std::move(out)};
}

}  // namespace thermopress
