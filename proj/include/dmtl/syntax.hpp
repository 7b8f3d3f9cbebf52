#pragma once

// DatalogMTL abstract syntax, parser for programs and datasets, and static
// program analysis (safety checks, depth, div, ruler).

#include "dmtl/temporal.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dmtl {

struct parse_error : std::runtime_error {
  int line, col;
  parse_error(int line_, int col_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ", col " + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

struct term {
  bool is_var = false;
  std::string name;
  bool operator==(const term&) const = default;
  auto operator<=>(const term&) const = default;
};

/// Metric atoms as a value tree. Constructors normalise TOP/BOTTOM through
/// the temporal operators so that a surviving TOP or BOTTOM node can only be
/// a bare body atom.
struct metric_atom {
  enum class op : std::uint8_t {
    truth,
    falsity,
    rel,
    box_plus,
    box_minus,
    dia_plus,
    dia_minus,
    since,
    until,
  };

  op kind = op::truth;
  std::string predicate;            // rel only
  std::vector<term> args;           // rel only
  std::optional<interval> window;   // operator nodes only
  std::vector<metric_atom> kids;    // 1 for unary ops, 2 for since/until

  bool operator==(const metric_atom&) const = default;

  static metric_atom top() { return metric_atom{}; }

  static metric_atom bottom() {
    metric_atom a;
    a.kind = op::falsity;
    return a;
  }

  static metric_atom relational(std::string pred, std::vector<term> ts) {
    metric_atom a;
    a.kind = op::rel;
    a.predicate = std::move(pred);
    a.args = std::move(ts);
    return a;
  }

  static metric_atom unary(op k, interval w, metric_atom m) {
    if (m.kind == op::truth) return top();
    if (m.kind == op::falsity) return bottom();
    metric_atom a;
    a.kind = k;
    a.window = std::move(w);
    a.kids.push_back(std::move(m));
    return a;
  }

  // continuous SINCE[w] anchor / continuous UNTIL[w] anchor
  static metric_atom binary(op k, interval w, metric_atom continuous, metric_atom anchor) {
    bool zero_in = w.contains(rational(0));
    if (anchor.kind == op::falsity) return bottom();
    if (continuous.kind == op::falsity) return zero_in ? std::move(anchor) : bottom();
    if (continuous.kind == op::truth)
      return unary(k == op::since ? op::dia_minus : op::dia_plus, std::move(w), std::move(anchor));
    if (anchor.kind == op::truth && zero_in) return top();
    metric_atom a;
    a.kind = k;
    a.window = std::move(w);
    a.kids.push_back(std::move(continuous));
    a.kids.push_back(std::move(anchor));
    return a;
  }

  bool is_unary_op() const {
    return kind == op::box_plus || kind == op::box_minus || kind == op::dia_plus || kind == op::dia_minus;
  }
  bool is_binary_op() const { return kind == op::since || kind == op::until; }

  bool ground() const {
    if (kind == op::rel) {
      for (const auto& t : args)
        if (t.is_var) return false;
      return true;
    }
    for (const auto& k : kids)
      if (!k.ground()) return false;
    return true;
  }

  void collect_vars(std::set<std::string>& out) const {
    if (kind == op::rel) {
      for (const auto& t : args)
        if (t.is_var) out.insert(t.name);
      return;
    }
    for (const auto& k : kids) k.collect_vars(out);
  }

  bool has_relational_leaf() const {
    if (kind == op::rel) return true;
    for (const auto& k : kids)
      if (k.has_relational_leaf()) return true;
    return false;
  }

  template <typename F>
  void for_each_leaf(F&& f) const {
    if (kind == op::rel) {
      f(*this);
      return;
    }
    for (const auto& k : kids) k.for_each_leaf(f);
  }

  /// Applies a substitution; variables without a binding stay in place.
  metric_atom substituted(const std::map<std::string, std::string>& sigma) const {
    metric_atom a(*this);
    if (kind == op::rel) {
      for (auto& t : a.args) {
        if (!t.is_var) continue;
        auto it = sigma.find(t.name);
        if (it != sigma.end()) t = term{false, it->second};
      }
      return a;
    }
    for (auto& k : a.kids) k = k.substituted(sigma);
    return a;
  }
};

struct rule {
  metric_atom head;
  std::vector<metric_atom> body;
  bool operator==(const rule&) const = default;
};

struct fact {
  std::string predicate;
  std::vector<std::string> constants;
  interval when;
  bool operator==(const fact&) const = default;
};

// --- rendering -------------------------------------------------------------

namespace detail {
inline const char* op_keyword(metric_atom::op k) {
  switch (k) {
    case metric_atom::op::box_plus: return "BOXPLUS";
    case metric_atom::op::box_minus: return "BOXMINUS";
    case metric_atom::op::dia_plus: return "DIAMONDPLUS";
    case metric_atom::op::dia_minus: return "DIAMONDMINUS";
    case metric_atom::op::since: return "SINCE";
    case metric_atom::op::until: return "UNTIL";
    default: return "";
  }
}
}  // namespace detail

inline std::string render(const metric_atom& a) {
  using op = metric_atom::op;
  switch (a.kind) {
    case op::truth: return "TOP";
    case op::falsity: return "BOTTOM";
    case op::rel: {
      std::string s = a.predicate;
      if (!a.args.empty()) {
        s += '(';
        for (size_t i = 0; i < a.args.size(); ++i) {
          if (i) s += ',';
          if (a.args[i].is_var) s += '?';
          s += a.args[i].name;
        }
        s += ')';
      }
      return s;
    }
    case op::box_plus:
    case op::box_minus:
    case op::dia_plus:
    case op::dia_minus: {
      std::string kid = a.kids[0].is_binary_op() ? "(" + render(a.kids[0]) + ")" : render(a.kids[0]);
      return std::string(detail::op_keyword(a.kind)) + a.window->render() + " " + kid;
    }
    case op::since:
    case op::until: {
      auto side = [](const metric_atom& m) {
        return m.is_binary_op() ? "(" + render(m) + ")" : render(m);
      };
      return side(a.kids[0]) + " " + detail::op_keyword(a.kind) + a.window->render() + " " + side(a.kids[1]);
    }
  }
  return {};
}

inline std::string render(const rule& r) {
  std::string s = render(r.head) + " :- ";
  for (size_t i = 0; i < r.body.size(); ++i) {
    if (i) s += ", ";
    s += render(r.body[i]);
  }
  return s;
}

inline std::string render(const fact& f) {
  std::string s = f.predicate;
  if (!f.constants.empty()) {
    s += '(';
    for (size_t i = 0; i < f.constants.size(); ++i) {
      if (i) s += ',';
      s += f.constants[i];
    }
    s += ')';
  }
  return s + "@" + f.when.render();
}

// --- program and analysis ----------------------------------------------------

struct program {
  std::vector<rule> rules;
  rational depth = 0;  // max over rules of the sum of operator right endpoints
  rational div = 1;    // 1 / product of distinct endpoint denominators

  static program from_rules(std::vector<rule> rs) {
    program p;
    p.rules = std::move(rs);
    std::set<bigint> denominators;
    for (const auto& r : p.rules) {
      rational rule_depth = 0;
      auto scan = [&](const metric_atom& a, auto&& self) -> void {
        if (a.window) {
          rule_depth += a.window->hi();
          denominators.insert(den(a.window->lo()));
          denominators.insert(den(a.window->hi()));
        }
        for (const auto& k : a.kids) self(k, self);
      };
      scan(r.head, scan);
      for (const auto& b : r.body) scan(b, scan);
      p.depth = std::max(p.depth, rule_depth);
    }
    bigint k = 1;
    for (const auto& d : denominators) k *= d;
    p.div = rational(1, k);
    return p;
  }
};

inline rational program_depth(const program& p) { return p.depth; }

/// True iff t lies on the ruler anchored at the given endpoints.
inline bool on_ruler(const rational& div, const std::set<rational>& endpoints, const rational& t) {
  for (const auto& e : endpoints)
    if (is_integral(rational((t - e) / div))) return true;
  return false;
}

/// All ruler points t + i*div inside the window, sorted and deduplicated.
inline std::vector<rational> ruler_points(const rational& div, const std::set<rational>& endpoints,
                                          const interval& window) {
  std::set<rational> out;
  for (const auto& e : endpoints) {
    bigint i = ceil_rational(rational((window.lo() - e) / div));
    bigint stop = floor_rational(rational((window.hi() - e) / div));
    for (; i <= stop; ++i) {
      rational t = e + rational(i) * div;
      if (window.contains(t)) out.insert(t);
    }
  }
  return std::vector<rational>(out.begin(), out.end());
}

inline std::vector<rational> ruler_points(const program& p, const std::set<rational>& endpoints,
                                          const interval& window) {
  return ruler_points(p.div, endpoints, window);
}

// --- parsing -----------------------------------------------------------------

namespace detail {

struct line_scanner {
  std::string_view text;
  int line;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg, size_t at) const { throw parse_error(line, int(at) + 1, msg); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos); }

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  bool peek(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos;
    return true;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
  }

  bool accept_implies() {
    skip_ws();
    if (pos + 1 < text.size() && text[pos] == ':' && text[pos + 1] == '-') {
      pos += 2;
      return true;
    }
    return false;
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

  std::string ident() {
    skip_ws();
    if (pos >= text.size() || !ident_start(text[pos])) fail("expected identifier");
    size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    return std::string(text.substr(start, pos - start));
  }

  std::string number_text() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
    size_t digits = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == digits) fail("expected number", start);
    if (pos < text.size() && (text[pos] == '.' || text[pos] == '/')) {
      ++pos;
      size_t more = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == more) fail("expected digits", pos);
    }
    return std::string(text.substr(start, pos - start));
  }

  rational number() {
    size_t start = pos;
    try {
      return parse_rational(number_text());
    } catch (const std::invalid_argument& e) {
      fail(e.what(), start);
    }
  }

  interval interval_literal() {
    skip_ws();
    size_t start = pos;
    bool lc;
    if (accept('[')) {
      lc = true;
    } else if (accept('(')) {
      lc = false;
    } else {
      fail("expected interval");
    }
    rational lo = number();
    expect(',', "between interval endpoints");
    rational hi = number();
    bool hc;
    if (accept(']')) {
      hc = true;
    } else if (accept(')')) {
      hc = false;
    } else {
      fail("unterminated interval");
    }
    if (lo > hi || (lo == hi && !(lc && hc))) fail("empty interval", start);
    return interval(std::move(lo), std::move(hi), lc, hc);
  }

  interval operator_window() {
    size_t start = pos;
    interval w = interval_literal();
    if (w.lo() < 0) fail("operator interval must contain only nonnegative numbers", start);
    return w;
  }
};

class program_parser {
 public:
  explicit program_parser(line_scanner& s) : s_(s) {}

  metric_atom atom() {
    metric_atom left = unary();
    s_.skip_ws();
    size_t mark = s_.pos;
    if (s_.pos < s_.text.size() && line_scanner::ident_start(s_.text[s_.pos])) {
      std::string word = s_.ident();
      if (word == "SINCE" || word == "UNTIL") {
        interval w = s_.operator_window();
        metric_atom right = unary();
        auto k = word == "SINCE" ? metric_atom::op::since : metric_atom::op::until;
        return metric_atom::binary(k, std::move(w), std::move(left), std::move(right));
      }
      s_.pos = mark;  // not an infix operator; leave for the caller
    }
    return left;
  }

 private:
  metric_atom unary() {
    s_.skip_ws();
    size_t mark = s_.pos;
    if (s_.pos < s_.text.size() && line_scanner::ident_start(s_.text[s_.pos])) {
      std::string word = s_.ident();
      metric_atom::op k;
      if (word == "BOXPLUS") {
        k = metric_atom::op::box_plus;
      } else if (word == "BOXMINUS") {
        k = metric_atom::op::box_minus;
      } else if (word == "DIAMONDPLUS") {
        k = metric_atom::op::dia_plus;
      } else if (word == "DIAMONDMINUS") {
        k = metric_atom::op::dia_minus;
      } else if (word == "TOP") {
        return metric_atom::top();
      } else if (word == "BOTTOM") {
        return metric_atom::bottom();
      } else {
        s_.pos = mark;
        return relational();
      }
      interval w = s_.operator_window();
      return metric_atom::unary(k, std::move(w), unary());
    }
    if (s_.accept('(')) {
      metric_atom inner = atom();
      s_.expect(')', "to close group");
      return inner;
    }
    s_.fail("expected metric atom");
  }

  metric_atom relational() {
    std::string pred = s_.ident();
    std::vector<term> ts;
    if (s_.accept('(')) {
      if (!s_.accept(')')) {
        do {
          ts.push_back(one_term());
        } while (s_.accept(','));
        s_.expect(')', "to close argument list");
      }
    }
    return metric_atom::relational(std::move(pred), std::move(ts));
  }

  term one_term() {
    s_.skip_ws();
    if (s_.accept('?')) return term{true, s_.ident()};
    if (s_.pos < s_.text.size() &&
        (s_.text[s_.pos] == '-' || s_.text[s_.pos] == '+' || (s_.text[s_.pos] >= '0' && s_.text[s_.pos] <= '9')))
      return term{false, s_.number_text()};
    return term{false, s_.ident()};
  }

  line_scanner& s_;
};

inline void check_head_shape(const metric_atom& a, const line_scanner& s) {
  const metric_atom* cur = &a;
  while (cur->kind == metric_atom::op::box_plus || cur->kind == metric_atom::op::box_minus)
    cur = &cur->kids[0];
  if (cur->kind != metric_atom::op::rel)
    s.fail("rule head must be a relational atom under BOXPLUS/BOXMINUS nesting only");
}

}  // namespace detail

/// Parses a program: one rule per line, `%` comments, blank lines ignored.
/// Enforces safety, head shape, and the at-least-one-relational-body-atom
/// requirement.
inline program parse_program(std::string_view text) {
  std::vector<rule> rules;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t eol = text.find('\n', start);
    std::string_view line = text.substr(start, eol == std::string_view::npos ? text.size() - start : eol - start);
    ++line_no;
    size_t cmt = line.find('%');
    if (cmt != std::string_view::npos) line = line.substr(0, cmt);

    detail::line_scanner s{line, line_no};
    if (!s.done()) {
      detail::program_parser p(s);
      rule r;
      r.head = p.atom();
      detail::check_head_shape(r.head, s);
      if (!s.accept_implies()) s.fail("expected ':-'");
      do {
        r.body.push_back(p.atom());
      } while (s.accept(','));
      if (!s.done()) s.fail("trailing input after rule");

      bool anchored = false;
      for (const auto& b : r.body) anchored = anchored || b.has_relational_leaf();
      if (!anchored) s.fail("rule body has no relational atom");

      std::set<std::string> head_vars, body_vars;
      r.head.collect_vars(head_vars);
      for (const auto& b : r.body) b.collect_vars(body_vars);
      for (const auto& v : head_vars)
        if (!body_vars.count(v)) s.fail("unsafe rule: head variable ?" + v + " not bound in body");

      rules.push_back(std::move(r));
    }
    if (eol == std::string_view::npos) break;
    start = eol + 1;
  }
  return program::from_rules(std::move(rules));
}

/// Parses a dataset: one fact per line `Pred(c,...)@INTERVAL`, `@t` sugar
/// for `@[t,t]`.
inline std::vector<fact> parse_dataset(std::string_view text) {
  std::vector<fact> out;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t eol = text.find('\n', start);
    std::string_view line = text.substr(start, eol == std::string_view::npos ? text.size() - start : eol - start);
    ++line_no;
    size_t cmt = line.find('%');
    if (cmt != std::string_view::npos) line = line.substr(0, cmt);

    detail::line_scanner s{line, line_no};
    if (!s.done()) {
      std::string pred = s.ident();
      std::vector<std::string> constants;
      if (s.accept('(')) {
        if (!s.accept(')')) {
          do {
            s.skip_ws();
            if (s.peek('?')) s.fail("dataset facts must be ground");
            if (s.pos < s.text.size() && (s.text[s.pos] == '-' || s.text[s.pos] == '+' ||
                                          (s.text[s.pos] >= '0' && s.text[s.pos] <= '9'))) {
              constants.push_back(s.number_text());
            } else {
              constants.push_back(s.ident());
            }
          } while (s.accept(','));
          s.expect(')', "to close argument list");
        }
      }
      s.expect('@', "before the fact interval");
      s.skip_ws();
      interval when = (s.peek('[') || s.peek('(')) ? s.interval_literal() : interval::punctual(s.number());
      if (!s.done()) s.fail("trailing input after fact");
      out.push_back(fact{std::move(pred), std::move(constants), std::move(when)});
    }
    if (eol == std::string_view::npos) break;
    start = eol + 1;
  }
  return out;
}

inline std::string render(const program& p) {
  std::string s;
  for (const auto& r : p.rules) {
    s += render(r);
    s += '\n';
  }
  return s;
}

}  // namespace dmtl
