#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "thermopress/errors.hpp"
#include "thermopress/matrix.hpp"
#include "thermopress/ratefn.hpp"
#include "thermopress/sft.hpp"
#include "thermopress/transfer.hpp"

namespace thermopress {

inline constexpr std::uint64_t kDefaultWordBudget = 100'000'000ull;

/// Closed subset of the line used for deviation events: either a closed
/// interval (sides may be infinite) or the union of two closed rays
/// (-inf, a] u [b, +inf). Widening by delta takes the closed
/// delta-neighbourhood.
struct RealSet {
  enum class Kind { Interval, RayPair };
  Kind kind = Kind::Interval;
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();

  static RealSet interval(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("interval endpoints out of order");
    return RealSet{Kind::Interval, lo, hi};
  }
  static RealSet whole_line() {
    return RealSet{Kind::Interval, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  }
  static RealSet ray_pair(double left_hi, double right_lo) {
    if (left_hi >= right_lo)
      throw std::invalid_argument("ray pair must leave a gap between the rays");
    return RealSet{Kind::RayPair, left_hi, right_lo};
  }
  /// Rays at distance >= c from the given center.
  static RealSet complement_ball(double center, double c) {
    return ray_pair(center - c, center + c);
  }

  bool contains(double x) const {
    if (kind == Kind::Interval) return x >= a && x <= b;
    return x <= a || x >= b;
  }

  RealSet widened(double delta) const {
    if (delta < 0.0) throw std::invalid_argument("neighbourhood radius must be >= 0");
    if (kind == Kind::Interval) return RealSet{Kind::Interval, a - delta, b + delta};
    if (a + delta >= b - delta) return whole_line();
    return RealSet{Kind::RayPair, a + delta, b - delta};
  }

  std::string str() const {
    auto num = [](double x) { return std::to_string(x); };
    if (kind == Kind::Interval) return "[" + num(a) + "," + num(b) + "]";
    return "(-inf," + num(a) + "]u[" + num(b) + ",+inf)";
  }
};

struct EnumerationOptions {
  std::uint64_t budget = kDefaultWordBudget;
  int threads = 1;
};

namespace detail {

// Exact dynamic programme over (last symbol, partial sum) pairs; exact and
// fast when the observable takes few values (indicators), abandoned in
// favour of DFS when the state count explodes.
inline constexpr std::size_t kDpStateCap = std::size_t(1) << 20;

struct DpState {
  Symbol last;
  double sum;
  double mass;
};

inline bool dp_mass(const SftModel& model, const MarkovMeasure& mu,
                    const LocallyConstantFn& psi, const RealSet& set, int n, double* out) {
  const int d = psi.depth();
  std::vector<DpState> cur;
  Symbol w1[1];
  for (Symbol i = 0; i < model.alphabet_size(); ++i) {
    double s0 = d == 1 ? psi.value(std::span<const Symbol>((w1[0] = i, w1), 1)) : 0.0;
    cur.push_back({i, s0, mu.pi[i]});
  }
  Symbol pair[2];
  std::vector<DpState> next;
  for (int step = 1; step < n; ++step) {
    next.clear();
    for (const DpState& st : cur) {
      for (Symbol j : model.successors(st.last)) {
        pair[0] = st.last;
        pair[1] = j;
        double add = d == 1 ? psi.value(std::span<const Symbol>(pair + 1, 1))
                            : psi.value(std::span<const Symbol>(pair, 2));
        next.push_back({j, st.sum + add, st.mass * mu.p(st.last, j)});
      }
    }
    std::sort(next.begin(), next.end(), [](const DpState& x, const DpState& y) {
      if (x.last != y.last) return x.last < y.last;
      return x.sum < y.sum;
    });
    cur.clear();
    for (const DpState& st : next) {
      if (!cur.empty() && cur.back().last == st.last && cur.back().sum == st.sum)
        cur.back().mass += st.mass;
      else
        cur.push_back(st);
    }
    if (cur.size() > kDpStateCap) return false;
  }
  KahanSum acc;
  for (const DpState& st : cur)
    if (set.contains(st.sum / n)) acc.add(st.mass);
  *out = acc.value();
  return true;
}

// Prefix-sharded DFS with a shard granularity that depends only on the data,
// so sums are byte-identical for any thread count.
inline double dfs_mass(const SftModel& model, const MarkovMeasure& mu,
                       const LocallyConstantFn& psi, const RealSet& set, int n,
                       int threads) {
  const int d = psi.depth();
  int shard_len = 1;
  while (shard_len < n - 1 && shard_len < 12 && model.word_count(shard_len) < 256)
    ++shard_len;
  shard_len = std::min(shard_len, n - 1);
  if (shard_len < 1) shard_len = 1;

  std::vector<Word> prefixes = enumerate_words(model, shard_len);
  std::vector<double> shard_sum(prefixes.size(), 0.0);

  auto run_shard = [&](std::size_t sh) {
    const Word& pre = prefixes[sh];
    // seed mass and windowed sum from the prefix
    double mass0 = mu.pi[pre.symbols[0]];
    for (int t = 0; t + 1 < shard_len; ++t)
      mass0 *= mu.p(pre.symbols[t], pre.symbols[t + 1]);
    double sum0 = 0.0;
    for (int t = 0; t + d <= shard_len; ++t)
      sum0 += psi.value(std::span<const Symbol>(pre.symbols.data() + t, d));

    std::vector<Symbol> path(n);
    std::copy(pre.symbols.begin(), pre.symbols.end(), path.begin());
    std::vector<double> mass(n), sum(n);
    std::vector<int> choice(n, 0);
    mass[shard_len - 1] = mass0;
    sum[shard_len - 1] = sum0;
    KahanSum acc;
    Symbol win[2];
    int depth = shard_len - 1;
    if (depth == n - 1) {
      if (set.contains(sum0 / n)) acc.add(mass0);
      shard_sum[sh] = acc.value();
      return;
    }
    choice[depth + 1] = 0;
    int level = depth + 1;
    while (level > depth) {
      const auto& succ = model.successors(path[level - 1]);
      if (choice[level] >= static_cast<int>(succ.size())) {
        --level;
        continue;
      }
      Symbol nxt = succ[choice[level]++];
      path[level] = nxt;
      win[0] = path[level - 1];
      win[1] = nxt;
      double add = d == 1 ? psi.value(std::span<const Symbol>(win + 1, 1))
                          : psi.value(std::span<const Symbol>(win, 2));
      mass[level] = mass[level - 1] * mu.p(win[0], nxt);
      sum[level] = sum[level - 1] + add;
      if (level == n - 1) {
        if (set.contains(sum[level] / n)) acc.add(mass[level]);
      } else {
        choice[level + 1] = 0;
        ++level;
      }
    }
    shard_sum[sh] = acc.value();
  };

  if (threads <= 1 || prefixes.size() <= 1) {
    for (std::size_t sh = 0; sh < prefixes.size(); ++sh) run_shard(sh);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
      while (true) {
        std::size_t sh = cursor.fetch_add(1);
        if (sh >= prefixes.size()) break;
        run_shard(sh);
      }
    };
    int nt = std::min<int>(threads, static_cast<int>(prefixes.size()));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // fixed merge order regardless of which worker produced which shard
  KahanSum total;
  for (double s : shard_sum) total.add(s);
  return total.value();
}

}  // namespace detail

/// Exact mass of the event { word w : birkhoff_sum(psi, w) / n in set }
/// under the stationary chain, summed over all admissible n-words with
/// compensated summation. Results are deterministic for any thread count.
inline double deviation_mass(const SftModel& model, const MarkovMeasure& mu,
                             const LocallyConstantFn& psi, const RealSet& set, int n,
                             const EnumerationOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("cylinder length must be >= 1");
  if (psi.depth() > 2)
    throw std::invalid_argument("observable depth > 2; recode to the block presentation");
  if (psi.depth() > n) throw std::invalid_argument("cylinder shorter than observable depth");
  std::uint64_t count = model.word_count(n);
  if (count > opts.budget)
    throw resource_limit_error(
        "enumeration of " + std::to_string(count) +
            " words exceeds the budget; no sampling fallback is provided",
        count, opts.budget);
  double out = 0.0;
  if (detail::dp_mass(model, mu, psi, set, n, &out)) return out;
  return detail::dfs_mass(model, mu, psi, set, n, opts.threads);
}

/// Per-length deviation masses and normalised decay rates -(1/n) log m_n.
struct DeviationMassSeries {
  RealSet set = RealSet::whole_line();
  std::vector<int> ns;
  std::vector<double> mass;
  std::vector<double> rate;  // +inf where the mass vanishes
};

inline DeviationMassSeries mass_series(const SftModel& model, const MarkovMeasure& mu,
                                       const LocallyConstantFn& psi, const RealSet& set,
                                       std::span<const int> ns,
                                       const EnumerationOptions& opts = {}) {
  DeviationMassSeries s;
  s.set = set;
  for (int n : ns) {
    double m = deviation_mass(model, mu, psi, set, n, opts);
    s.ns.push_back(n);
    s.mass.push_back(m);
    s.rate.push_back(m > 0.0 ? -std::log(m) / n
                             : std::numeric_limits<double>::infinity());
  }
  return s;
}

/// Least-squares estimate of the exponential decay rate of the masses,
/// reported together with the raw rate sequence (the limit and the slope can
/// differ at small n). Vanishing masses anywhere in the range report +inf.
struct LdpEstimate {
  DeviationMassSeries series;
  double slope = 0.0;
  double intercept = 0.0;
  double min_rate = 0.0;  // limsup-faithful finite-n proxy
  bool infinite = false;
};

inline LdpEstimate estimate_L(const SftModel& model, const MarkovMeasure& mu,
                              const LocallyConstantFn& psi, const RealSet& set,
                              std::span<const int> ns, const EnumerationOptions& opts = {}) {
  LdpEstimate est;
  est.series = mass_series(model, mu, psi, set, ns, opts);
  for (double m : est.series.mass)
    if (m == 0.0) est.infinite = true;
  if (est.infinite) {
    est.slope = est.min_rate = std::numeric_limits<double>::infinity();
    return est;
  }
  const std::size_t k = est.series.ns.size();
  if (k < 2) throw std::invalid_argument("rate estimation needs at least two lengths");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double x = est.series.ns[i];
    double y = -std::log(est.series.mass[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  est.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  est.intercept = (sy - est.slope * sx) / k;
  est.min_rate = *std::min_element(est.series.rate.begin(), est.series.rate.end());
  return est;
}

/// Checks that the exact finite-n rate sits inside the level-1 sandwich
/// around inf I over [a,b], with slack delta(n) = C log(n)/n.
struct SandwichReport {
  bool pass = false;
  double rate_at_largest_n = 0.0;
  double inf_rate_fn = 0.0;
  double delta = 0.0;
  double C = 1.0;
  int n_used = 0;
  DeviationMassSeries series;
  std::string message;
};

/// inf of I over the (uncentered) interval [a,b] intersected with the rate
/// domain; convexity with minimum at the mean makes this a clamp.
inline double inf_rate_over_interval(const FreeEnergy& fe, double a, double b,
                                     double T_max = kDefaultTmax) {
  if (a > b) throw std::invalid_argument("interval endpoints out of order");
  double ac = a - fe.centering();
  double bc = b - fe.centering();
  if (ac <= 0.0 && bc >= 0.0) return 0.0;
  auto [lo, hi] = rate_domain(fe, T_max, true);
  double s = ac > 0.0 ? ac : bc;  // endpoint closest to the mean
  s = std::min(std::max(s, lo), hi);
  return legendre_point(fe, s, T_max, true).I;
}

inline SandwichReport ldp_sandwich_check(const FreeEnergy& fe, const SftModel& model,
                                         const MarkovMeasure& mu,
                                         const LocallyConstantFn& psi, double a, double b,
                                         std::span<const int> ns, double C = 1.0,
                                         const EnumerationOptions& opts = {},
                                         double T_max = kDefaultTmax) {
  SandwichReport rep;
  rep.C = C;
  rep.series = mass_series(model, mu, psi, RealSet::interval(a, b), ns, opts);
  rep.inf_rate_fn = inf_rate_over_interval(fe, a, b, T_max);
  int best = -1;
  for (std::size_t i = 0; i < rep.series.ns.size(); ++i)
    if (rep.series.mass[i] > 0.0 &&
        (best < 0 || rep.series.ns[i] > rep.series.ns[best]))
      best = static_cast<int>(i);
  if (best < 0) {
    rep.message = "all masses vanish on the requested range";
    return rep;
  }
  rep.n_used = rep.series.ns[best];
  rep.rate_at_largest_n = rep.series.rate[best];
  rep.delta = C * std::log(static_cast<double>(rep.n_used)) / rep.n_used;
  rep.pass = rep.rate_at_largest_n >= rep.inf_rate_fn - rep.delta &&
             rep.rate_at_largest_n <= rep.inf_rate_fn + rep.delta;
  if (!rep.pass)
    rep.message = "rate " + std::to_string(rep.rate_at_largest_n) + " outside [" +
                  std::to_string(rep.inf_rate_fn - rep.delta) + "," +
                  std::to_string(rep.inf_rate_fn + rep.delta) + "]";
  return rep;
}

/// Upper-bound check: P_top - Lhat(I_delta) must dominate the exact
/// deviation-set pressure. Lhat uses the limsup-faithful min-rate estimator
/// (the least-squares slope overshoots the limit on two-sided sets because
/// of the sub-exponential prefactor).
struct UpperBoundReport {
  double p_top = 0.0;
  double L_hat = 0.0;
  double upper_bound = 0.0;     // P_top - L_hat
  std::optional<double> exact;  // rate-function value for symmetric ray pairs
  bool ordering_ok = false;
  DeviationMassSeries series;
};

inline UpperBoundReport deviation_upper_bound_check(
    const FreeEnergy& fe, const SftModel& model, const MarkovMeasure& mu,
    const LocallyConstantFn& psi, const RealSet& set, double delta,
    std::span<const int> ns, const EnumerationOptions& opts = {},
    double T_max = kDefaultTmax) {
  UpperBoundReport rep;
  rep.p_top = fe.pressure_phi();
  RealSet widened = set.widened(delta);
  rep.series = mass_series(model, mu, psi, widened, ns, opts);
  double min_rate = std::numeric_limits<double>::infinity();
  for (double r : rep.series.rate) min_rate = std::min(min_rate, r);
  rep.L_hat = min_rate;
  rep.upper_bound = rep.p_top - rep.L_hat;
  if (set.kind == RealSet::Kind::RayPair) {
    double mean = fe.centering();
    double c_left = mean - set.a;
    double c_right = set.b - mean;
    if (std::abs(c_left - c_right) < 1e-9 && c_left > 0.0) {
      double ip = legendre_point(fe, c_right, T_max, true).I;
      double im = legendre_point(fe, -c_right, T_max, true).I;
      rep.exact = rep.p_top - std::min(ip, im);
    }
  }
  rep.ordering_ok = !rep.exact || rep.upper_bound >= *rep.exact - 1e-6;
  return rep;
}

}  // namespace thermopress
