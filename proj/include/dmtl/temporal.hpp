#pragma once

// Exact rational time arithmetic and interval/interval-set algebra.
// All values are immutable after construction and safe to share.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmtl {

using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

inline bigint num(const rational& q) { return numerator(q); }
inline bigint den(const rational& q) { return denominator(q); }

inline bool is_integral(const rational& q) { return den(q) == 1; }

/// Largest integer n with n <= q.
inline bigint floor_rational(const rational& q) {
  bigint n = num(q), d = den(q);
  bigint r = n / d;
  if (n < 0 && r * d != n) --r;
  return r;
}

/// Smallest integer n with n >= q.
inline bigint ceil_rational(const rational& q) {
  bigint n = num(q), d = den(q);
  bigint r = n / d;
  if (n > 0 && r * d != n) ++r;
  return r;
}

/// lcm over positive rationals: normalise to a common denominator and take
/// the integer lcm of the numerators.
inline rational rational_lcm(const rational& a, const rational& b) {
  if (a <= 0 || b <= 0) throw std::invalid_argument("rational_lcm: arguments must be positive");
  bigint n = boost::multiprecision::lcm(num(a) * den(b), num(b) * den(a));
  return rational(n, den(a) * den(b));
}

inline std::string to_string(const rational& q) {
  std::ostringstream os;
  os << num(q);
  if (!is_integral(q)) os << '/' << den(q);
  return os.str();
}

/// Parses an optionally signed integer, decimal (converted exactly) or
/// fraction `p/q`. Throws std::invalid_argument on malformed input.
inline rational parse_rational(std::string_view text) {
  auto bad = [&] { throw std::invalid_argument("malformed number '" + std::string(text) + "'"); };
  size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
  auto digits = [&](std::string& out) {
    size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') out += text[i++];
    if (i == start) bad();
  };
  std::string whole;
  digits(whole);
  rational value;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::string frac;
    digits(frac);
    bigint scale = 1;
    for (size_t k = 0; k < frac.size(); ++k) scale *= 10;
    value = rational(bigint(whole) * scale + bigint(frac), scale);
  } else if (i < text.size() && text[i] == '/') {
    ++i;
    std::string q;
    digits(q);
    bigint d(q);
    if (d == 0) bad();
    value = rational(bigint(whole), d);
  } else {
    value = rational(bigint(whole));
  }
  if (i != text.size()) bad();
  return neg ? rational(-value) : value;
}

/// A nonempty bounded interval over rational time points. Punctual intervals
/// [t,t] are allowed; the empty interval is not representable.
class interval {
 public:
  interval(rational lo, rational hi, bool lo_closed, bool hi_closed)
      : lo_(std::move(lo)), hi_(std::move(hi)), lo_closed_(lo_closed), hi_closed_(hi_closed) {
    if (lo_ > hi_ || (lo_ == hi_ && !(lo_closed_ && hi_closed_)))
      throw std::invalid_argument("empty interval");
  }

  static interval closed(rational lo, rational hi) { return interval(std::move(lo), std::move(hi), true, true); }
  static interval punctual(rational t) { return interval(t, t, true, true); }

  const rational& lo() const { return lo_; }
  const rational& hi() const { return hi_; }
  bool lo_closed() const { return lo_closed_; }
  bool hi_closed() const { return hi_closed_; }

  bool punctual_point() const { return lo_ == hi_; }
  rational length() const { return hi_ - lo_; }

  bool contains(const rational& t) const {
    if (t < lo_ || t > hi_) return false;
    if (t == lo_ && !lo_closed_) return false;
    if (t == hi_ && !hi_closed_) return false;
    return true;
  }

  /// Set containment of another interval in this one.
  bool contains(const interval& o) const {
    bool lo_ok = o.lo_ > lo_ || (o.lo_ == lo_ && (lo_closed_ || !o.lo_closed_));
    bool hi_ok = o.hi_ < hi_ || (o.hi_ == hi_ && (hi_closed_ || !o.hi_closed_));
    return lo_ok && hi_ok;
  }

  interval shifted(const rational& delta) const { return interval(lo_ + delta, hi_ + delta, lo_closed_, hi_closed_); }

  /// Mirror image {-t | t in this}, used to turn future-directed windows
  /// into past-directed ones.
  interval reflected() const { return interval(-hi_, -lo_, hi_closed_, lo_closed_); }

  bool operator==(const interval& o) const {
    return lo_ == o.lo_ && hi_ == o.hi_ && lo_closed_ == o.lo_closed_ && hi_closed_ == o.hi_closed_;
  }

  std::string render() const {
    std::string s;
    s += lo_closed_ ? '[' : '(';
    s += to_string(lo_);
    s += ',';
    s += to_string(hi_);
    s += hi_closed_ ? ']' : ')';
    return s;
  }

  /// Parses the textual form produced by render(). Also accepts `[t,t]`
  /// written as bare `t` when allow_bare_point is set.
  static interval parse(std::string_view text, bool allow_bare_point = false) {
    if (text.empty()) throw std::invalid_argument("empty interval text");
    if (text.front() != '[' && text.front() != '(') {
      if (!allow_bare_point) throw std::invalid_argument("expected interval");
      rational t = parse_rational(text);
      return punctual(t);
    }
    bool lc = text.front() == '[';
    if (text.back() != ']' && text.back() != ')') throw std::invalid_argument("unterminated interval");
    bool hc = text.back() == ']';
    std::string_view body = text.substr(1, text.size() - 2);
    size_t comma = body.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("interval needs two endpoints");
    rational lo = parse_rational(body.substr(0, comma));
    rational hi = parse_rational(body.substr(comma + 1));
    return interval(std::move(lo), std::move(hi), lc, hc);
  }

 private:
  rational lo_, hi_;
  bool lo_closed_, hi_closed_;
};

inline std::optional<interval> intersect(const interval& a, const interval& b) {
  rational lo = std::max(a.lo(), b.lo());
  rational hi = std::min(a.hi(), b.hi());
  bool lc = (lo == a.lo() && !a.lo_closed()) || (lo == b.lo() && !b.lo_closed()) ? false : true;
  bool hc = (hi == a.hi() && !a.hi_closed()) || (hi == b.hi() && !b.hi_closed()) ? false : true;
  if (lo > hi || (lo == hi && !(lc && hc))) return std::nullopt;
  return interval(std::move(lo), std::move(hi), lc, hc);
}

namespace detail {

// Orders left endpoints; at equal value a closed bound starts earlier.
inline bool lo_before(const interval& a, const interval& b) {
  if (a.lo() != b.lo()) return a.lo() < b.lo();
  return a.lo_closed() && !b.lo_closed();
}

// True when b's upper bound reaches at least as far as a's.
inline bool hi_reaches(const interval& a, const interval& b) {
  if (a.hi() != b.hi()) return a.hi() < b.hi();
  return !a.hi_closed() || b.hi_closed();
}

// a and b (with lo_before(a,b)) overlap or touch without a gap.
inline bool joinable(const interval& a, const interval& b) {
  if (b.lo() < a.hi()) return true;
  if (b.lo() > a.hi()) return false;
  return a.hi_closed() || b.lo_closed();
}

}  // namespace detail

/// Canonical form of a finite union of intervals: sorted by lower endpoint,
/// pairwise disjoint and non-adjacent. Equality is structural.
class interval_set {
 public:
  interval_set() = default;

  explicit interval_set(interval iv) { xs_.push_back(std::move(iv)); }

  /// Builds the canonical form from arbitrary fragments.
  static interval_set coalesce(std::vector<interval> pieces) {
    std::sort(pieces.begin(), pieces.end(),
              [](const interval& a, const interval& b) { return detail::lo_before(a, b); });
    interval_set out;
    for (auto& p : pieces) {
      if (!out.xs_.empty() && detail::joinable(out.xs_.back(), p)) {
        const interval& last = out.xs_.back();
        if (detail::hi_reaches(last, p)) {
          interval merged(last.lo(), p.hi(), last.lo_closed(), p.hi_closed());
          out.xs_.back() = std::move(merged);
        }
      } else {
        out.xs_.push_back(std::move(p));
      }
    }
    return out;
  }

  bool empty() const { return xs_.empty(); }
  size_t size() const { return xs_.size(); }
  const std::vector<interval>& intervals() const { return xs_; }
  auto begin() const { return xs_.begin(); }
  auto end() const { return xs_.end(); }

  bool contains(const rational& t) const {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), t,
                               [](const rational& v, const interval& iv) { return v < iv.lo(); });
    if (it == xs_.begin()) return false;
    return std::prev(it)->contains(t);
  }

  /// Set containment of a (connected) interval: it must fit in one member.
  bool covers(const interval& iv) const {
    for (const auto& x : xs_)
      if (x.contains(iv)) return true;
    return false;
  }

  bool operator==(const interval_set& o) const { return xs_ == o.xs_; }

  const rational& min_endpoint() const { return xs_.front().lo(); }
  const rational& max_endpoint() const { return xs_.back().hi(); }

 private:
  std::vector<interval> xs_;
};

inline interval_set union_of(const interval_set& a, const interval_set& b) {
  std::vector<interval> pieces(a.begin(), a.end());
  pieces.insert(pieces.end(), b.begin(), b.end());
  return interval_set::coalesce(std::move(pieces));
}

inline interval_set intersection_of(const interval_set& a, const interval_set& b) {
  std::vector<interval> pieces;
  for (const auto& x : a)
    for (const auto& y : b)
      if (auto z = intersect(x, y)) pieces.push_back(*z);
  return interval_set::coalesce(std::move(pieces));
}

/// Subtracts one interval from another; appends up to two remainders.
inline void subtract_into(const interval& x, const interval& y, std::vector<interval>& out) {
  if (!intersect(x, y)) {
    out.push_back(x);
    return;
  }
  // part of x strictly before y
  if (x.lo() < y.lo() || (x.lo() == y.lo() && x.lo_closed() && !y.lo_closed())) {
    out.emplace_back(x.lo(), y.lo(), x.lo_closed(), !y.lo_closed());
  }
  // part of x strictly after y
  if (x.hi() > y.hi() || (x.hi() == y.hi() && x.hi_closed() && !y.hi_closed())) {
    out.emplace_back(y.hi(), x.hi(), !y.hi_closed(), x.hi_closed());
  }
}

inline interval_set difference_of(const interval_set& a, const interval_set& b) {
  std::vector<interval> cur(a.begin(), a.end());
  for (const auto& y : b) {
    std::vector<interval> next;
    for (const auto& x : cur) subtract_into(x, y, next);
    cur = std::move(next);
  }
  return interval_set::coalesce(std::move(cur));
}

inline interval_set shifted(const interval_set& s, const rational& delta) {
  std::vector<interval> pieces;
  pieces.reserve(s.size());
  for (const auto& x : s) pieces.push_back(x.shifted(delta));
  return interval_set::coalesce(std::move(pieces));
}

/// {t | exists t1 in s with t - t1 in w}. An endpoint is included iff both
/// contributing endpoints are closed.
inline interval_set minkowski_sum(const interval_set& s, const interval& w) {
  std::vector<interval> pieces;
  pieces.reserve(s.size());
  for (const auto& x : s)
    pieces.emplace_back(x.lo() + w.lo(), x.hi() + w.hi(), x.lo_closed() && w.lo_closed(),
                        x.hi_closed() && w.hi_closed());
  return interval_set::coalesce(std::move(pieces));
}

/// {t | {t - u | u in w} is contained in s}. The shrunk window must fit
/// inside a single maximal interval, so this distributes over members.
inline interval_set erode(const interval_set& s, const interval& w) {
  std::vector<interval> pieces;
  for (const auto& x : s) {
    rational lo = x.lo() + w.hi();
    rational hi = x.hi() + w.lo();
    bool lc = x.lo_closed() || !w.hi_closed();
    bool hc = x.hi_closed() || !w.lo_closed();
    if (lo < hi || (lo == hi && lc && hc)) pieces.emplace_back(std::move(lo), std::move(hi), lc, hc);
  }
  return interval_set::coalesce(std::move(pieces));
}

inline interval_set clip(const interval_set& s, const interval& window) {
  return intersection_of(s, interval_set(window));
}

}  // namespace dmtl
