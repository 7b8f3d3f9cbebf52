#pragma once

// Periodic materialisations: a core fact store plus optional left/right
// periods whose contents tile outward forever. Provides windowed unfolding,
// period-length extension and placement alignment, periodic difference and
// union, saturation detection for the initial materialisation, and the Pds
// period-identification procedure used by the incremental engine.

#include "dmtl/store.hpp"

namespace dmtl {

enum class side { left, right };

/// <core, left period, right period>. The left period is half-open [a,b),
/// the right period (c,d]. An absent period means the unfolding has no
/// facts beyond that side of the core. When a period is present the core
/// carries no content beyond it; the period content repeats outward shifted
/// by integer multiples of the period length.
struct periodic_materialisation {
  fact_store core;
  std::optional<interval> left;
  std::optional<interval> right;

  bool operator==(const periodic_materialisation&) const = default;
};

using pmat = periodic_materialisation;

namespace detail {

inline void check_period_shape(const interval& p, side s) {
  if (p.length() == 0) throw std::invalid_argument("period must have positive length");
  if (s == side::left && !(p.lo_closed() && !p.hi_closed()))
    throw std::invalid_argument("left period must be of the form [a,b)");
  if (s == side::right && !(!p.lo_closed() && p.hi_closed()))
    throw std::invalid_argument("right period must be of the form (c,d]");
}

// keeps the points <= hi
inline interval_set clip_upper(const interval_set& s, const rational& hi) {
  std::vector<interval> pieces;
  for (const auto& iv : s) {
    if (iv.lo() > hi || (iv.lo() == hi && !iv.lo_closed())) continue;
    if (iv.hi() <= hi) {
      pieces.push_back(iv);
    } else {
      pieces.emplace_back(iv.lo(), hi, iv.lo_closed(), true);
    }
  }
  return interval_set::coalesce(std::move(pieces));
}

// keeps the points >= lo
inline interval_set clip_lower(const interval_set& s, const rational& lo) {
  std::vector<interval> pieces;
  for (const auto& iv : s) {
    if (iv.hi() < lo || (iv.hi() == lo && !iv.hi_closed())) continue;
    if (iv.lo() >= lo) {
      pieces.push_back(iv);
    } else {
      pieces.emplace_back(lo, iv.hi(), true, iv.hi_closed());
    }
  }
  return interval_set::coalesce(std::move(pieces));
}

// keeps the points strictly below / strictly above the bound
inline interval_set keep_below(const interval_set& s, const rational& bound) {
  std::vector<interval> pieces;
  for (const auto& iv : s) {
    if (iv.lo() >= bound) continue;
    if (iv.hi() < bound || (iv.hi() == bound && !iv.hi_closed())) {
      pieces.push_back(iv);
    } else {
      pieces.emplace_back(iv.lo(), bound, iv.lo_closed(), false);
    }
  }
  return interval_set::coalesce(std::move(pieces));
}

inline interval_set keep_above(const interval_set& s, const rational& bound) {
  std::vector<interval> pieces;
  for (const auto& iv : s) {
    if (iv.hi() <= bound) continue;
    if (iv.lo() > bound || (iv.lo() == bound && !iv.lo_closed())) {
      pieces.push_back(iv);
    } else {
      pieces.emplace_back(bound, iv.hi(), false, iv.hi_closed());
    }
  }
  return interval_set::coalesce(std::move(pieces));
}

}  // namespace detail

/// Canonicalises a triple: validates period shapes, trims core content
/// outside the span, and drops periods with empty content.
inline pmat make_pmat(fact_store core, std::optional<interval> left, std::optional<interval> right) {
  if (left) detail::check_period_shape(*left, side::left);
  if (right) detail::check_period_shape(*right, side::right);
  if (left || right) {
    fact_store trimmed;
    for (const auto& [atom, times] : core.atoms()) {
      interval_set cut = times;
      if (left) cut = detail::clip_lower(cut, left->lo());
      if (right) cut = detail::clip_upper(cut, right->hi());
      trimmed.adopt(atom, std::move(cut));
    }
    core = std::move(trimmed);
  }
  if (left && project(core, *left).empty()) left.reset();
  if (right && project(core, *right).empty()) right.reset();
  return pmat{std::move(core), std::move(left), std::move(right)};
}

inline pmat bounded_pmat(fact_store core) { return pmat{std::move(core), std::nullopt, std::nullopt}; }

/// The unfolding of one atom restricted to a bounded window.
inline interval_set unfold_atom(const pmat& m, const ground_atom& atom, const interval& w) {
  const interval_set* s = m.core.find(atom);
  if (!s) return {};
  interval_set window(w);
  std::vector<interval> pieces;
  for (const auto& iv : intersection_of(*s, window)) pieces.push_back(iv);

  if (m.right && w.hi() > m.right->hi()) {
    rational delta = m.right->length();
    interval_set content = intersection_of(*s, interval_set(*m.right));
    if (!content.empty()) {
      bigint n_lo = ceil_rational(rational((w.lo() - m.right->hi()) / delta));
      if (n_lo < 1) n_lo = 1;
      bigint n_hi = floor_rational(rational((w.hi() - m.right->lo()) / delta)) + 1;
      for (bigint n = n_lo; n <= n_hi; ++n)
        for (const auto& iv : intersection_of(shifted(content, rational(n) * delta), window)) pieces.push_back(iv);
    }
  }
  if (m.left && w.lo() < m.left->lo()) {
    rational delta = m.left->length();
    interval_set content = intersection_of(*s, interval_set(*m.left));
    if (!content.empty()) {
      bigint n_lo = ceil_rational(rational((m.left->lo() - w.hi()) / delta));
      if (n_lo < 1) n_lo = 1;
      bigint n_hi = floor_rational(rational((m.left->lo() - w.lo()) / delta)) + 1;
      for (bigint n = n_lo; n <= n_hi; ++n)
        for (const auto& iv : intersection_of(shifted(content, rational(-n) * delta), window)) pieces.push_back(iv);
    }
  }
  return interval_set::coalesce(std::move(pieces));
}

/// unfold(m) restricted to a bounded window, as a plain store.
inline fact_store unfold_window(const pmat& m, const interval& w) {
  fact_store out;
  for (const auto& [atom, times] : m.core.atoms()) out.adopt(atom, unfold_atom(m, atom, w));
  return out;
}

namespace detail {

// Extends the period at one end to the given multiple of its length by
// copying period content outward. Unfolding is unchanged.
inline void extend_period_length(pmat& m, side s, const rational& new_len) {
  std::optional<interval>& p = s == side::left ? m.left : m.right;
  rational delta = p->length();
  if (new_len == delta) return;
  rational ratio(new_len / delta);
  if (!is_integral(ratio)) throw std::logic_error("period extension must be an integer multiple");
  bigint k = num(ratio);
  fact_store extra;
  for (const auto& [atom, times] : m.core.atoms()) {
    interval_set content = intersection_of(times, interval_set(*p));
    if (content.empty()) continue;
    std::vector<interval> pieces;
    for (bigint i = 1; i < k; ++i)
      for (const auto& iv : shifted(content, (s == side::left ? -rational(i) : rational(i)) * delta))
        pieces.push_back(iv);
    extra.adopt(atom, interval_set::coalesce(std::move(pieces)));
  }
  m.core = store_union(m.core, extra);
  if (s == side::left) {
    p = interval(p->hi() - new_len, p->hi(), true, false);
  } else {
    p = interval(p->lo(), p->lo() + new_len, false, true);
  }
}

// Slides the period at one end outward (right period to a larger start,
// left period to a smaller end), filling the vacated core region from the
// unfolding. Unfolding is unchanged.
inline void slide_period_out(pmat& m, side s, const rational& shift_by) {
  if (shift_by == 0) return;
  if (shift_by < 0) throw std::logic_error("periods only slide outward");
  if (s == side::right) {
    interval p = *m.right;
    interval gap(p.hi(), p.hi() + shift_by, false, true);
    fact_store fill = unfold_window(m, gap);
    m.core = store_union(m.core, fill);
    m.right = interval(p.lo() + shift_by, p.hi() + shift_by, false, true);
  } else {
    interval p = *m.left;
    interval gap(p.lo() - shift_by, p.lo(), true, false);
    fact_store fill = unfold_window(m, gap);
    m.core = store_union(m.core, fill);
    m.left = interval(p.lo() - shift_by, p.hi() - shift_by, true, false);
  }
}

inline const std::optional<interval>& period_of(const pmat& m, side s) { return s == side::left ? m.left : m.right; }

}  // namespace detail

/// Ext: gives both materialisations equal-length periods at one end (the
/// lcm of the two lengths) without changing their unfoldings.
inline std::pair<pmat, pmat> ext(pmat m1, pmat m2, side s) {
  const auto& p1 = detail::period_of(m1, s);
  const auto& p2 = detail::period_of(m2, s);
  if (!p1 || !p2) throw std::logic_error("ext requires periods on both inputs");
  rational l = rational_lcm(p1->length(), p2->length());
  detail::extend_period_length(m1, s, l);
  detail::extend_period_length(m2, s, l);
  return {std::move(m1), std::move(m2)};
}

/// Aln: re-seats both periods at one end on a common interval. When only
/// one input has a period there, an empty period is introduced for the
/// other; the placement slides outward past the bounded input's content.
inline std::tuple<pmat, pmat, interval> aln(pmat m1, pmat m2, side s) {
  bool has1 = detail::period_of(m1, s).has_value();
  bool has2 = detail::period_of(m2, s).has_value();
  if (!has1 && !has2) throw std::logic_error("aln requires a period on some input");
  if (has1 && has2) {
    const interval& p1 = *detail::period_of(m1, s);
    const interval& p2 = *detail::period_of(m2, s);
    if (p1.length() != p2.length()) throw std::logic_error("aln requires equal period lengths; ext first");
    if (s == side::right) {
      rational start = std::max(p1.lo(), p2.lo());
      detail::slide_period_out(m1, s, rational(start - p1.lo()));
      detail::slide_period_out(m2, s, rational(start - p2.lo()));
    } else {
      rational end = std::min(p1.hi(), p2.hi());
      detail::slide_period_out(m1, s, rational(p1.hi() - end));
      detail::slide_period_out(m2, s, rational(p2.hi() - end));
    }
    interval common = *detail::period_of(m1, s);
    return {std::move(m1), std::move(m2), common};
  }
  pmat& with = has1 ? m1 : m2;
  const pmat& without = has1 ? m2 : m1;
  const interval& p = *detail::period_of(with, s);
  if (s == side::right) {
    auto edge = without.core.max_endpoint();
    if (edge && *edge > p.lo()) detail::slide_period_out(with, s, rational(*edge - p.lo()));
  } else {
    auto edge = without.core.min_endpoint();
    if (edge && *edge < p.hi()) detail::slide_period_out(with, s, rational(p.hi() - *edge));
  }
  interval common = *detail::period_of(with, s);
  return {std::move(m1), std::move(m2), common};
}

namespace detail {

struct aligned_pair {
  pmat a, b;
  std::optional<interval> left, right;
};

inline aligned_pair align_both_ends(pmat m1, pmat m2) {
  aligned_pair out{std::move(m1), std::move(m2), std::nullopt, std::nullopt};
  for (side s : {side::left, side::right}) {
    bool hasA = period_of(out.a, s).has_value();
    bool hasB = period_of(out.b, s).has_value();
    if (!hasA && !hasB) continue;
    if (hasA && hasB) std::tie(out.a, out.b) = ext(std::move(out.a), std::move(out.b), s);
    auto [a2, b2, common] = aln(std::move(out.a), std::move(out.b), s);
    out.a = std::move(a2);
    out.b = std::move(b2);
    (s == side::left ? out.left : out.right) = common;
  }
  return out;
}

}  // namespace detail

/// Periodic difference: unfold(result) = unfold(m1) - unfold(m2) on every
/// window. Periods are extended and aligned first; the cores are then
/// subtracted directly.
inline pmat periodic_minus(const pmat& m1, const pmat& m2) {
  if (m2.core.empty()) return m1;
  detail::aligned_pair ap = detail::align_both_ends(m1, m2);
  std::optional<interval> left = ap.a.left ? ap.left : std::nullopt;
  std::optional<interval> right = ap.a.right ? ap.right : std::nullopt;
  return make_pmat(store_difference(ap.a.core, ap.b.core), std::move(left), std::move(right));
}

/// Periodic union: unfold(result) = unfold(m1) u unfold(m2) on every window.
inline pmat periodic_union(const pmat& m1, const pmat& m2) {
  if (m2.core.empty()) return m1;
  if (m1.core.empty()) return m2;
  detail::aligned_pair ap = detail::align_both_ends(m1, m2);
  std::optional<interval> left = (ap.a.left || ap.b.left) ? ap.left : std::nullopt;
  std::optional<interval> right = (ap.a.right || ap.b.right) ? ap.right : std::nullopt;
  return make_pmat(store_union(ap.a.core, ap.b.core), std::move(left), std::move(right));
}

/// Equivalence of unfoldings: both differences come out empty.
inline bool equivalent(const pmat& m1, const pmat& m2) {
  return periodic_minus(m1, m2).core.empty() && periodic_minus(m2, m1).core.empty();
}

// --- period detection ----------------------------------------------------

namespace detail {

// Compares the projections at w and at w shifted by delta, atom by atom.
inline bool shift_equal_windows(const fact_store& s, const interval& w, const rational& delta) {
  interval_set w1{w};
  interval_set w2{w.shifted(delta)};
  for (const auto& [atom, times] : s.atoms()) {
    interval_set a = intersection_of(times, w1);
    interval_set b = intersection_of(times, w2);
    if (!(shifted(a, delta) == b)) return false;
  }
  return true;
}

// All content of a store merged into one coalesced set of time intervals.
inline interval_set content_profile(const fact_store& s) {
  std::vector<interval> pieces;
  for (const auto& [atom, times] : s.atoms())
    for (const auto& iv : times) pieces.push_back(iv);
  return interval_set::coalesce(std::move(pieces));
}

inline bool range_clear(const interval_set& profile, const rational& lo, const rational& hi) {
  if (lo > hi) return true;
  return intersection_of(profile, interval_set(interval(lo, hi, true, true))).empty();
}

// d's content strictly outside the candidate period must coincide with the
// periodic tiling of the period content, as far as d reaches; otherwise
// clipping the core to the span would change the unfolding.
inline bool flank_tile_consistent(const fact_store& d, const interval& period, side s) {
  if (d.empty()) return true;
  if (s == side::left) {
    auto dmin = d.min_endpoint();
    if (!dmin || *dmin >= period.lo()) return true;
    pmat trial = make_pmat(d, period, std::nullopt);
    fact_store actual, expected;
    for (const auto& [atom, times] : d.atoms()) actual.adopt(atom, keep_below(times, period.lo()));
    interval w(*dmin, period.lo(), true, true);
    for (const auto& [atom, times] : trial.core.atoms())
      expected.adopt(atom, keep_below(unfold_atom(trial, atom, w), period.lo()));
    return actual == expected;
  }
  auto dmax = d.max_endpoint();
  if (!dmax || *dmax <= period.hi()) return true;
  pmat trial = make_pmat(d, std::nullopt, period);
  fact_store actual, expected;
  for (const auto& [atom, times] : d.atoms()) actual.adopt(atom, keep_above(times, period.hi()));
  interval w(period.hi(), *dmax, true, true);
  for (const auto& [atom, times] : trial.core.atoms())
    expected.adopt(atom, keep_above(unfold_atom(trial, atom, w), period.hi()));
  return actual == expected;
}

struct span_bounds {
  rational t_min, t_max;  // dataset endpoint extremes (0,0 when no numbers)
};

inline span_bounds dataset_bounds(const fact_store& e) {
  auto lo = e.min_endpoint();
  auto hi = e.max_endpoint();
  if (!lo) return {rational(0), rational(0)};
  return {*lo, *hi};
}

}  // namespace detail

/// Searches round-stable repeating flank patterns in `current`, assuming
/// current extends previous by exactly one consequence round. Returns the
/// left/right periods of Definition-style quadruples: candidate windows of
/// length 2*depth anchored on the ruler, stability of the whole candidate
/// span between the two rounds, and shift-equal window projections.
/// Enumeration prefers the smallest offset, then the innermost anchors.
inline std::optional<std::pair<interval, interval>> detect_saturation(const program& p, const fact_store& e,
                                                                      const fact_store& current,
                                                                      const fact_store& previous) {
  const rational depth2 = p.depth * 2;
  const rational& div = p.div;
  std::set<rational> endpoints = e.endpoints();
  if (endpoints.empty()) endpoints.insert(rational(0));
  auto [t_min, t_max] = detail::dataset_bounds(e);

  fact_store diff = store_difference(current, previous);
  interval_set profile = detail::content_profile(diff);
  if (!detail::range_clear(profile, t_min, t_max)) return std::nullopt;

  rational cmin = current.min_endpoint().value_or(t_min);
  rational cmax = current.max_endpoint().value_or(t_max);

  std::optional<interval> left;
  {
    rational low = std::min(cmin, t_min) - depth2 - 2 * div;
    auto anchors = ruler_points(div, endpoints, interval(low, t_min, true, true));
    rational width = t_min - low;
    bigint kmax = ceil_rational(rational(width / div));
    for (bigint k = 1; k <= kmax && !left; ++k) {
      rational delta = rational(k) * div;
      for (auto it = anchors.rbegin(); it != anchors.rend(); ++it) {
        const rational& x = *it;
        if (!(x + delta + depth2 < t_min)) continue;
        if (!detail::range_clear(profile, x, t_min)) break;  // anchors further out only widen the range
        if (!detail::shift_equal_windows(current, interval::closed(x, x + depth2), delta)) continue;
        left = interval(x, x + delta, true, false);
        break;
      }
    }
  }
  if (!left) return std::nullopt;

  std::optional<interval> right;
  {
    rational high = std::max(cmax, t_max) + depth2 + 2 * div;
    auto anchors = ruler_points(div, endpoints, interval(t_max, high, true, true));
    rational width = high - t_max;
    bigint kmax = ceil_rational(rational(width / div));
    for (bigint k = 1; k <= kmax && !right; ++k) {
      rational delta = rational(k) * div;
      for (const rational& y : anchors) {
        if (!(y > t_max)) continue;
        if (y + delta + depth2 > high) break;
        if (!detail::range_clear(profile, t_max, y + delta + depth2)) break;
        if (!detail::shift_equal_windows(current, interval::closed(y, y + depth2), delta)) continue;
        right = interval(y + depth2, y + delta + depth2, false, true);
        break;
      }
    }
  }
  if (!right) return std::nullopt;

  // stability across the whole span is the conjunction of the per-side
  // checks plus the data-span check done above
  return std::make_pair(*left, *right);
}

/// Pds: identifies repeating flank patterns in the dataset `d` being grown
/// by iterative rule application, where `delta` holds the facts derived in
/// the last round (not yet merged into d). Returns absent when any delta
/// fact overlaps the dataset span or no valid period pair exists yet.
///
/// Candidate offsets are multiples of the reference period length (of the
/// materialisation being updated); with no reference period the offset
/// degrades to multiples of div. Candidates stay inside the reference
/// period's flank zone so that alignment with the reference is possible,
/// and the flanks of d beyond the candidate span must already agree with
/// the candidate tiling. Finally the pending delta itself must be covered
/// by the candidate unfolding.
inline std::optional<std::pair<interval, interval>> pds(const program& p, const fact_store& e,
                                                        const std::optional<interval>& ref_left,
                                                        const std::optional<interval>& ref_right,
                                                        const fact_store& d, const fact_store& delta) {
  const rational depth2 = p.depth * 2;
  const rational& div = p.div;
  std::set<rational> endpoints = e.endpoints();
  if (endpoints.empty()) endpoints.insert(rational(0));
  auto [t_min, t_max] = detail::dataset_bounds(e);

  // early exit plus the u/v bounds of the delta-free flank zones
  std::optional<rational> u, v;
  for (const auto& [atom, times] : delta.atoms()) {
    for (const auto& iv : times) {
      if (intersect(iv, interval::closed(t_min, t_max))) return std::nullopt;
      if (iv.hi() <= t_min) {
        if (!u || iv.hi() > *u) u = iv.hi();
      } else {
        if (!v || iv.lo() < *v) v = iv.lo();
      }
    }
  }

  auto dmin = d.min_endpoint();
  auto dmax = d.max_endpoint();

  std::optional<interval> left;
  {
    rational zone_top = ref_left ? ref_left->hi() : t_min;
    rational step = ref_left ? ref_left->length() : div;
    rational low = std::min(std::min(dmin.value_or(t_min), t_min), zone_top) - depth2 - 2 * step - 2 * div;
    if (u && *u > low) low = *u;
    auto anchors = ruler_points(div, endpoints, interval(low, zone_top, true, true));
    bigint kmax = ceil_rational(rational((zone_top - low) / step));
    for (bigint k = 1; k <= kmax && !left; ++k) {
      rational delta_len = rational(k) * step;
      for (auto it = anchors.rbegin(); it != anchors.rend(); ++it) {
        const rational& x = *it;
        if (u && !(x > *u)) break;  // anchors are descending
        if (!(x + delta_len + depth2 < zone_top) || !(x + delta_len + depth2 < t_min)) continue;
        if (!detail::shift_equal_windows(d, interval::closed(x, x + depth2), delta_len)) continue;
        interval candidate(x, x + delta_len, true, false);
        if (!detail::flank_tile_consistent(d, candidate, side::left)) continue;
        left = candidate;
        break;
      }
    }
  }
  if (!left) return std::nullopt;

  std::optional<interval> right;
  {
    rational zone_bot = ref_right ? ref_right->lo() : t_max;
    rational step = ref_right ? ref_right->length() : div;
    rational high = std::max(std::max(dmax.value_or(t_max), t_max), zone_bot) + depth2 + 2 * step + 2 * div;
    if (v && *v < high) high = *v;
    auto anchors = ruler_points(div, endpoints, interval(std::min(zone_bot, high), high, true, true));
    bigint kmax = ceil_rational(rational((high - zone_bot) / step));
    for (bigint k = 1; k <= kmax && !right; ++k) {
      rational delta_len = rational(k) * step;
      for (const rational& y : anchors) {
        if (!(y > zone_bot) || !(y > t_max)) continue;
        if (v && !(y + delta_len + depth2 < *v)) break;  // anchors are ascending
        if (!detail::shift_equal_windows(d, interval::closed(y, y + depth2), delta_len)) continue;
        interval candidate(y + depth2, y + delta_len + depth2, false, true);
        if (!detail::flank_tile_consistent(d, candidate, side::right)) continue;
        right = candidate;
        break;
      }
    }
  }
  if (!right) return std::nullopt;

  // the pending delta must already be covered by the candidate unfolding
  if (!delta.empty()) {
    pmat trial = make_pmat(d, *left, *right);
    for (const auto& [atom, times] : delta.atoms())
      for (const auto& iv : times) {
        interval hull = interval::closed(iv.lo(), iv.hi());
        if (!unfold_atom(trial, atom, hull).covers(iv)) return std::nullopt;
      }
  }
  return std::make_pair(*left, *right);
}

// --- serialization ---------------------------------------------------------

/// `.pmat` format: optional `#LPERIOD [a,b)` / `#RPERIOD (c,d]` header
/// lines followed by the core in dataset format.
inline std::string render(const pmat& m) {
  std::string out;
  if (m.left) out += "#LPERIOD " + m.left->render() + "\n";
  if (m.right) out += "#RPERIOD " + m.right->render() + "\n";
  out += render(m.core);
  return out;
}

inline pmat parse_pmat(std::string_view text) {
  std::optional<interval> left, right;
  std::string body;
  size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    size_t eol = text.find('\n', start);
    std::string_view line = text.substr(start, eol == std::string_view::npos ? text.size() - start : eol - start);
    ++line_no;
    if (!line.empty() && line.front() == '#') {
      size_t sp = line.find(' ');
      std::string_view tag = line.substr(0, sp);
      if (sp == std::string_view::npos) throw parse_error(line_no, 1, "malformed header line");
      interval p = interval::parse(line.substr(sp + 1));
      if (tag == "#LPERIOD") {
        detail::check_period_shape(p, side::left);
        left = p;
      } else if (tag == "#RPERIOD") {
        detail::check_period_shape(p, side::right);
        right = p;
      } else {
        throw parse_error(line_no, 1, "unknown header " + std::string(tag));
      }
    } else {
      body += line;
      body += '\n';
    }
    if (eol == std::string_view::npos) break;
    start = eol + 1;
  }
  return make_pmat(parse_store(body), std::move(left), std::move(right));
}

}  // namespace dmtl
