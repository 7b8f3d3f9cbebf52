#pragma once

// Fact stores: coalesced per-atom interval lists with semantic set
// operations, projection, shift comparison and flat-file serialization.

#include "dmtl/syntax.hpp"

#include <map>

namespace dmtl {

struct ground_atom {
  std::string predicate;
  std::vector<std::string> constants;
  bool operator==(const ground_atom&) const = default;
  auto operator<=>(const ground_atom&) const = default;
};

inline std::string render(const ground_atom& a) {
  std::string s = a.predicate;
  if (!a.constants.empty()) {
    s += '(';
    for (size_t i = 0; i < a.constants.size(); ++i) {
      if (i) s += ',';
      s += a.constants[i];
    }
    s += ')';
  }
  return s;
}

/// A finite interpretation: every atom maps to a nonempty coalesced
/// interval set. Atoms of one predicate are contiguous in the underlying
/// ordered map, which doubles as the predicate index for grounding scans.
class fact_store {
 public:
  using map_type = std::map<ground_atom, interval_set>;

  fact_store() = default;

  static fact_store from_facts(const std::vector<fact>& facts) {
    fact_store s;
    for (const auto& f : facts) s.insert(f);
    return s;
  }

  /// Pointwise union with coalescing. Returns true iff some time point was
  /// newly covered. Throws on predicate arity mismatch.
  bool insert(const fact& f) { return insert(ground_atom{f.predicate, f.constants}, interval_set(f.when)); }

  bool insert(const ground_atom& atom, const interval_set& times) {
    if (times.empty()) return false;
    check_arity(atom);
    auto [it, fresh] = m_.try_emplace(atom, times);
    if (fresh) return true;
    interval_set merged = union_of(it->second, times);
    bool grew = !(merged == it->second);
    it->second = std::move(merged);
    return grew;
  }

  bool empty() const { return m_.empty(); }

  /// Number of facts: maximal intervals summed over atoms.
  size_t fact_count() const {
    size_t n = 0;
    for (const auto& [atom, times] : m_) n += times.size();
    return n;
  }

  size_t atom_count() const { return m_.size(); }

  const map_type& atoms() const { return m_; }
  auto begin() const { return m_.begin(); }
  auto end() const { return m_.end(); }

  const interval_set* find(const ground_atom& atom) const {
    auto it = m_.find(atom);
    return it == m_.end() ? nullptr : &it->second;
  }

  /// Iterates the atoms of one predicate (contiguous range of the map).
  template <typename F>
  void for_each_atom_of(const std::string& predicate, F&& f) const {
    for (auto it = m_.lower_bound(ground_atom{predicate, {}}); it != m_.end() && it->first.predicate == predicate;
         ++it)
      f(it->first, it->second);
  }

  bool holds_at(const ground_atom& atom, const rational& t) const {
    const interval_set* s = find(atom);
    return s && s->contains(t);
  }

  /// I |= R(c)@rho iff the atom covers every point of rho.
  bool satisfies(const fact& f) const {
    const interval_set* s = find(ground_atom{f.predicate, f.constants});
    return s && s->covers(f.when);
  }

  bool operator==(const fact_store& o) const { return m_ == o.m_; }

  std::optional<rational> min_endpoint() const {
    std::optional<rational> r;
    for (const auto& [atom, times] : m_)
      if (!r || times.min_endpoint() < *r) r = times.min_endpoint();
    return r;
  }

  std::optional<rational> max_endpoint() const {
    std::optional<rational> r;
    for (const auto& [atom, times] : m_)
      if (!r || times.max_endpoint() > *r) r = times.max_endpoint();
    return r;
  }

  std::set<rational> endpoints() const {
    std::set<rational> out;
    for (const auto& [atom, times] : m_)
      for (const auto& iv : times) {
        out.insert(iv.lo());
        out.insert(iv.hi());
      }
    return out;
  }

  void erase_atom(const ground_atom& atom) { m_.erase(atom); }

  // internal: inserts a prebuilt coalesced set for an atom not present yet
  void adopt(ground_atom atom, interval_set times) {
    if (times.empty()) return;
    m_.emplace(std::move(atom), std::move(times));
  }

 private:
  void check_arity(const ground_atom& atom) const {
    auto it = m_.lower_bound(ground_atom{atom.predicate, {}});
    if (it != m_.end() && it->first.predicate == atom.predicate &&
        it->first.constants.size() != atom.constants.size())
      throw std::invalid_argument("arity mismatch for predicate " + atom.predicate);
  }

  map_type m_;
};

inline fact_store store_union(const fact_store& a, const fact_store& b) {
  fact_store out = a;
  for (const auto& [atom, times] : b) out.insert(atom, times);
  return out;
}

inline fact_store store_difference(const fact_store& a, const fact_store& b) {
  fact_store out;
  for (const auto& [atom, times] : a) {
    const interval_set* cut = b.find(atom);
    interval_set left = cut ? difference_of(times, *cut) : times;
    out.adopt(atom, std::move(left));
  }
  return out;
}

inline fact_store store_intersection(const fact_store& a, const fact_store& b) {
  fact_store out;
  for (const auto& [atom, times] : a) {
    const interval_set* other = b.find(atom);
    if (!other) continue;
    out.adopt(atom, intersection_of(times, *other));
  }
  return out;
}

/// Semantic containment: every time point of a is covered by b.
inline bool store_subseteq(const fact_store& a, const fact_store& b) {
  for (const auto& [atom, times] : a) {
    const interval_set* other = b.find(atom);
    if (!other) return false;
    if (!difference_of(times, *other).empty()) return false;
  }
  return true;
}

/// Projection I|w: every interval set intersected with the window.
inline fact_store project(const fact_store& s, const interval& w) {
  fact_store out;
  interval_set window(w);
  for (const auto& [atom, times] : s) out.adopt(atom, intersection_of(times, window));
  return out;
}

inline fact_store shifted(const fact_store& s, const rational& delta) {
  fact_store out;
  for (const auto& [atom, times] : s) out.adopt(atom, shifted(times, delta));
  return out;
}

/// True iff shifting every interval of a by delta yields exactly b.
inline bool is_shift(const fact_store& a, const fact_store& b, const rational& delta) {
  if (a.atom_count() != b.atom_count()) return false;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!(shifted(ia->second, delta) == ib->second)) return false;
  }
  return true;
}

/// Deterministic dataset serialization: atoms in map order, intervals
/// sorted by lower endpoint, one fact per line.
inline std::string render(const fact_store& s) {
  std::string out;
  for (const auto& [atom, times] : s)
    for (const auto& iv : times) {
      out += render(atom);
      out += '@';
      out += iv.render();
      out += '\n';
    }
  return out;
}

inline fact_store parse_store(std::string_view text) { return fact_store::from_facts(parse_dataset(text)); }

}  // namespace dmtl
