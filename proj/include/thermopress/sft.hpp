#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermopress/errors.hpp"

namespace thermopress {

using Symbol = int;

inline char symbol_to_char(Symbol s) {
  if (s < 0 || s >= 36) throw std::invalid_argument("symbol out of printable range (0..35)");
  return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('A' + (s - 10));
}

inline Symbol char_to_symbol(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'Z') return 10 + (c - 'A');
  throw std::invalid_argument(std::string("invalid symbol character '") + c + "'");
}

/// One-sided subshift of finite type over alphabet {0,..,m-1} with a 0/1
/// transition matrix. Every row and every column must contain a 1 (no
/// stranded symbols). Irreducibility and primitivity are certified at
/// construction; primitivity uses the Wielandt bound (m-1)^2 + 1.
class SftModel {
 public:
  SftModel(int alphabet_size, const std::vector<std::vector<int>>& transition,
           std::vector<std::string> label_names = {})
      : m_(alphabet_size), labels_(std::move(label_names)) {
    if (m_ <= 0) throw std::invalid_argument("alphabet size must be positive");
    if (static_cast<int>(transition.size()) != m_)
      throw std::invalid_argument("transition matrix must have one row per symbol");
    adj_.assign(static_cast<std::size_t>(m_) * m_, 0);
    for (int i = 0; i < m_; ++i) {
      if (static_cast<int>(transition[i].size()) != m_)
        throw std::invalid_argument("transition matrix must be square");
      for (int j = 0; j < m_; ++j) {
        int v = transition[i][j];
        if (v != 0 && v != 1)
          throw std::invalid_argument("transition entries must be 0 or 1");
        adj_[static_cast<std::size_t>(i) * m_ + j] = static_cast<std::uint8_t>(v);
      }
    }
    if (!labels_.empty() && static_cast<int>(labels_.size()) != m_)
      throw std::invalid_argument("label list must have one entry per symbol");
    succ_.resize(m_);
    pred_count_.assign(m_, 0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) {
        if (adj_[static_cast<std::size_t>(i) * m_ + j]) {
          succ_[i].push_back(j);
          ++pred_count_[j];
        }
      }
      if (succ_[i].empty())
        throw std::invalid_argument("row " + std::to_string(i) + " of transition has no 1");
    }
    for (int j = 0; j < m_; ++j)
      if (pred_count_[j] == 0)
        throw std::invalid_argument("column " + std::to_string(j) + " of transition has no 1");
    irreducible_ = compute_irreducible();
    primitive_ = irreducible_ && compute_primitive();
  }

  int alphabet_size() const { return m_; }
  bool admissible(Symbol i, Symbol j) const {
    return adj_[static_cast<std::size_t>(i) * m_ + j] != 0;
  }
  const std::vector<Symbol>& successors(Symbol i) const { return succ_[i]; }
  /// Lexicographically first admissible successor; used as the deterministic
  /// one-symbol cylinder extension.
  Symbol first_successor(Symbol i) const { return succ_[i].front(); }

  bool is_irreducible() const { return irreducible_; }
  bool is_primitive() const { return primitive_; }
  int wielandt_bound() const { return (m_ - 1) * (m_ - 1) + 1; }

  std::string label(Symbol s) const {
    if (!labels_.empty()) return labels_[s];
    return std::string(1, symbol_to_char(s));
  }

  bool admissible_word(std::span<const Symbol> w) const {
    if (w.empty()) return false;
    for (auto s : w)
      if (s < 0 || s >= m_) return false;
    for (std::size_t t = 0; t + 1 < w.size(); ++t)
      if (!admissible(w[t], w[t + 1])) return false;
    return true;
  }

  /// Number of admissible words of length n (sum of the entries of the
  /// (n-1)-th power of the transition matrix), saturating at 2^63.
  std::uint64_t word_count(int n) const {
    if (n < 1) throw std::invalid_argument("word length must be >= 1");
    constexpr std::uint64_t kCap = std::uint64_t(1) << 63;
    std::vector<std::uint64_t> v(m_, 1);
    for (int step = 1; step < n; ++step) {
      std::vector<std::uint64_t> nv(m_, 0);
      for (int i = 0; i < m_; ++i) {
        std::uint64_t s = 0;
        for (Symbol j : succ_[i]) {
          s += v[j];
          if (s >= kCap) { s = kCap; break; }
        }
        nv[i] = s;
      }
      v = std::move(nv);
    }
    std::uint64_t total = 0;
    for (auto x : v) {
      total += x;
      if (total >= kCap) return kCap;
    }
    return total;
  }

  bool operator==(const SftModel& o) const { return m_ == o.m_ && adj_ == o.adj_; }

 private:
  bool compute_irreducible() const {
    // strongly connected: forward and backward reachability from state 0
    auto reach = [&](bool forward) {
      std::vector<char> seen(m_, 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < m_; ++j) {
          bool edge = forward ? admissible(i, j) : admissible(j, i);
          if (edge && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(true) && reach(false);
  }

  bool compute_primitive() const {
    // Positivity of boolean powers is monotone (every row has a 1), so
    // repeated squaring up to the Wielandt bound decides primitivity.
    const int words = (m_ + 63) / 64;
    std::vector<std::uint64_t> cur(static_cast<std::size_t>(m_) * words, 0);
    auto bit = [&](std::vector<std::uint64_t>& rows, int i, int j) -> std::uint64_t& {
      return rows[static_cast<std::size_t>(i) * words + j / 64];
    };
    for (int i = 0; i < m_; ++i)
      for (Symbol j : succ_[i]) bit(cur, i, j) |= std::uint64_t(1) << (j % 64);
    auto all_positive = [&](const std::vector<std::uint64_t>& rows) {
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j)
          if (!(rows[static_cast<std::size_t>(i) * words + j / 64] >> (j % 64) & 1)) return false;
      return true;
    };
    long long exponent = 1;
    const long long bound = wielandt_bound();
    while (true) {
      if (all_positive(cur)) return true;
      if (exponent > bound) return false;
      std::vector<std::uint64_t> next(static_cast<std::size_t>(m_) * words, 0);
      for (int i = 0; i < m_; ++i) {
        for (int j = 0; j < m_; ++j) {
          if (cur[static_cast<std::size_t>(i) * words + j / 64] >> (j % 64) & 1) {
            for (int w = 0; w < words; ++w)
              next[static_cast<std::size_t>(i) * words + w] |=
                  cur[static_cast<std::size_t>(j) * words + w];
          }
        }
      }
      cur = std::move(next);
      exponent *= 2;
    }
  }

  int m_;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<Symbol>> succ_;
  std::vector<int> pred_count_;
  std::vector<std::string> labels_;
  bool irreducible_ = false;
  bool primitive_ = false;
};

/// Finite admissible word; stands for the cylinder of sequences starting
/// with these symbols.
struct Word {
  std::vector<Symbol> symbols;

  int length() const { return static_cast<int>(symbols.size()); }
  bool operator==(const Word&) const = default;
  auto operator<=>(const Word&) const = default;

  std::string str() const {
    std::string s;
    s.reserve(symbols.size());
    for (Symbol x : symbols) s.push_back(symbol_to_char(x));
    return s;
  }

  static Word parse(const std::string& text) {
    Word w;
    w.symbols.reserve(text.size());
    for (char c : text) w.symbols.push_back(char_to_symbol(c));
    return w;
  }
};

inline Word make_word(const SftModel& model, std::initializer_list<Symbol> syms) {
  Word w{std::vector<Symbol>(syms)};
  if (!model.admissible_word(w.symbols))
    throw std::invalid_argument("inadmissible word " + w.str());
  return w;
}

/// Streams every admissible word of length n exactly once, in lexicographic
/// order; the visitor sees the symbol buffer of the current word.
inline void enumerate_words(const SftModel& model, int n,
                            const std::function<void(std::span<const Symbol>)>& visit) {
  if (n < 1) throw std::invalid_argument("word length must be >= 1");
  const int m = model.alphabet_size();
  std::vector<Symbol> path(n);
  // iterative DFS over (depth, next-successor-index)
  std::vector<int> choice(n, 0);
  int depth = 0;
  while (depth >= 0) {
    if (depth == 0) {
      if (choice[0] >= m) break;
      path[0] = choice[0];
      ++choice[0];
      if (n == 1)
        visit(std::span<const Symbol>(path.data(), 1));
      else {
        choice[1] = 0;
        depth = 1;
      }
      continue;
    }
    const auto& succ = model.successors(path[depth - 1]);
    if (choice[depth] >= static_cast<int>(succ.size())) {
      --depth;
      continue;
    }
    path[depth] = succ[choice[depth]];
    ++choice[depth];
    if (depth == n - 1) {
      visit(std::span<const Symbol>(path.data(), static_cast<std::size_t>(n)));
    } else {
      choice[depth + 1] = 0;
      ++depth;
    }
  }
}

/// Collecting overload for small n.
inline std::vector<Word> enumerate_words(const SftModel& model, int n) {
  std::vector<Word> out;
  enumerate_words(model, n, [&](std::span<const Symbol> w) {
    out.push_back(Word{std::vector<Symbol>(w.begin(), w.end())});
  });
  return out;
}

/// Real-valued function on sequence space depending on the first `depth`
/// coordinates, stored as a dense table over k-words (NaN marks inadmissible
/// words, which are never legal lookups). Houses potentials and observables.
class LocallyConstantFn {
 public:
  LocallyConstantFn(const SftModel& model, int depth, double fill = 0.0)
      : m_(model.alphabet_size()), depth_(depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    std::size_t size = 1;
    for (int i = 0; i < depth; ++i) {
      size *= static_cast<std::size_t>(m_);
      if (size > (std::size_t(1) << 40))
        throw std::invalid_argument("table too large for depth " + std::to_string(depth));
    }
    table_.assign(size, std::numeric_limits<double>::quiet_NaN());
    std::vector<Symbol> w(depth);
    fill_admissible(model, w, 0, fill);
  }

  static LocallyConstantFn constant(const SftModel& model, double c) {
    return LocallyConstantFn(model, 1, c);
  }

  /// Indicator of the length-k cylinder [w].
  static LocallyConstantFn indicator(const SftModel& model, const Word& w) {
    LocallyConstantFn f(model, w.length(), 0.0);
    f.set(w.symbols, 1.0);
    return f;
  }

  int depth() const { return depth_; }
  int alphabet_size() const { return m_; }

  std::size_t index(std::span<const Symbol> w) const {
    std::size_t idx = 0;
    for (int t = 0; t < depth_; ++t) idx = idx * m_ + static_cast<std::size_t>(w[t]);
    return idx;
  }

  double value(std::span<const Symbol> w) const {
    double v = table_[index(w)];
    if (std::isnan(v)) throw std::invalid_argument("lookup of inadmissible word");
    return v;
  }

  /// Unchecked lookup for hot loops; caller guarantees admissibility.
  double value_raw(std::size_t idx) const { return table_[idx]; }

  void set(std::span<const Symbol> w, double v) {
    if (static_cast<int>(w.size()) != depth_)
      throw std::invalid_argument("word length must equal table depth");
    if (!std::isfinite(v)) throw std::invalid_argument("table values must be finite");
    double& slot = table_[index(w)];
    // NaN marks a word that is inadmissible for the model
    if (std::isnan(slot)) throw std::invalid_argument("cannot set value on inadmissible word");
    slot = v;
  }

  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : table_)
      if (!std::isnan(v) && v > m) m = v;
    return m;
  }
  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : table_)
      if (!std::isnan(v) && v < m) m = v;
    return m;
  }

  /// Same function presented at a larger depth: the value depends only on
  /// the first `depth()` symbols of the longer word.
  LocallyConstantFn padded(const SftModel& model, int new_depth) const {
    if (new_depth < depth_) throw std::invalid_argument("padding cannot reduce depth");
    if (new_depth == depth_) return *this;
    LocallyConstantFn out(model, new_depth, 0.0);
    std::vector<Symbol> w(new_depth);
    out.pad_from(model, *this, w, 0);
    return out;
  }

  /// alpha*this + beta*g, padding both to the common depth.
  static LocallyConstantFn lincomb(const SftModel& model, const LocallyConstantFn& f,
                                   double alpha, const LocallyConstantFn& g, double beta) {
    int k = std::max(f.depth(), g.depth());
    LocallyConstantFn fp = f.padded(model, k);
    LocallyConstantFn gp = g.padded(model, k);
    for (std::size_t i = 0; i < fp.table_.size(); ++i) {
      if (!std::isnan(fp.table_[i]))
        fp.table_[i] = alpha * fp.table_[i] + beta * gp.table_[i];
    }
    return fp;
  }

  LocallyConstantFn shifted(double c) const {
    LocallyConstantFn out = *this;
    for (double& v : out.table_)
      if (!std::isnan(v)) v += c;
    return out;
  }

  bool operator==(const LocallyConstantFn& o) const {
    if (m_ != o.m_ || depth_ != o.depth_) return false;
    for (std::size_t i = 0; i < table_.size(); ++i) {
      bool a = std::isnan(table_[i]), b = std::isnan(o.table_[i]);
      if (a != b) return false;
      if (!a && table_[i] != o.table_[i]) return false;
    }
    return true;
  }

 private:
  void fill_admissible(const SftModel& model, std::vector<Symbol>& w, int pos, double fill) {
    if (pos == depth_) {
      table_[index(w)] = fill;
      return;
    }
    if (pos == 0) {
      for (Symbol s = 0; s < m_; ++s) {
        w[0] = s;
        fill_admissible(model, w, 1, fill);
      }
    } else {
      for (Symbol s : model.successors(w[pos - 1])) {
        w[pos] = s;
        fill_admissible(model, w, pos + 1, fill);
      }
    }
  }

  void pad_from(const SftModel& model, const LocallyConstantFn& src,
                std::vector<Symbol>& w, int pos) {
    if (pos == depth_) {
      table_[index(w)] = src.value(std::span<const Symbol>(w.data(), src.depth()));
      return;
    }
    if (pos == 0) {
      for (Symbol s = 0; s < m_; ++s) {
        w[0] = s;
        pad_from(model, src, w, 1);
      }
    } else {
      for (Symbol s : model.successors(w[pos - 1])) {
        w[pos] = s;
        pad_from(model, src, w, pos + 1);
      }
    }
  }

  int m_;
  int depth_;
  std::vector<double> table_;
};

/// Birkhoff sum of f over the len(w)-depth+1 fully determined windows of w.
inline double birkhoff_sum(const LocallyConstantFn& f, std::span<const Symbol> w) {
  const int k = f.depth();
  const int n = static_cast<int>(w.size());
  if (n < k) throw std::invalid_argument("word shorter than function depth");
  double s = 0.0;
  for (int t = 0; t + k <= n; ++t) s += f.value(w.subspan(t, k));
  return s;
}

inline double birkhoff_sum(const LocallyConstantFn& f, const Word& w) {
  return birkhoff_sum(f, std::span<const Symbol>(w.symbols));
}

/// Maximal spread of the windowed sum of f over an n-cylinder: words of
/// length max(n, depth(f)) are grouped by their n-prefix and the spread of
/// birkhoff-style sums with max(1, n-depth+1) windows is maximised over
/// prefixes. Zero for every n >= depth(f), which certifies the bounded
/// variation condition with constant 0 for locally constant functions.
inline double bowen_variation(const SftModel& model, const LocallyConstantFn& f, int n) {
  if (n < 1) throw std::invalid_argument("cylinder length must be >= 1");
  const int k = f.depth();
  if (n >= k) return 0.0;  // sums are functions of the word itself
  const int total = k;  // one window, needs k symbols
  double worst = 0.0;
  // group extensions by n-prefix; enumeration is lexicographic so prefix
  // blocks are contiguous
  std::vector<Symbol> prev_prefix;
  double lo = 0.0, hi = 0.0;
  bool open = false;
  auto flush = [&]() {
    if (open && hi - lo > worst) worst = hi - lo;
  };
  enumerate_words(model, total, [&](std::span<const Symbol> w) {
    double s = f.value(w);
    std::vector<Symbol> prefix(w.begin(), w.begin() + n);
    if (!open || prefix != prev_prefix) {
      flush();
      prev_prefix = prefix;
      lo = hi = s;
      open = true;
    } else {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  });
  flush();
  return worst;
}

}  // namespace thermopress
