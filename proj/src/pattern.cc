#include "restcheck/pattern.h"

#include <algorithm>
#include <bitset>

#include "restcheck/error.h"

namespace restcheck {

namespace {

using Node = Pattern::Node;
using Kind = Pattern::Node::Kind;

constexpr char kPrintableFirst = 0x20;
constexpr char kPrintableLast = 0x7e;
constexpr std::size_t kDefaultRepeatSlack = 8;
constexpr int kMaxSampleAttempts = 10000;

using CharBits = std::bitset<128>;

std::string bits_to_chars(const CharBits& bits) {
  std::string out;
  for (std::size_t c = 0; c < bits.size(); ++c) {
    if (bits.test(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

CharBits printable() {
  CharBits bits;
  for (char c = kPrintableFirst; c <= kPrintableLast; ++c) bits.set(static_cast<unsigned char>(c));
  return bits;
}

CharBits class_bits(char escape) {
  CharBits bits;
  switch (escape) {
    case 'd': case 'D':
      for (char c = '0'; c <= '9'; ++c) bits.set(static_cast<unsigned char>(c));
      break;
    case 'w': case 'W':
      for (char c = 'a'; c <= 'z'; ++c) bits.set(static_cast<unsigned char>(c));
      for (char c = 'A'; c <= 'Z'; ++c) bits.set(static_cast<unsigned char>(c));
      for (char c = '0'; c <= '9'; ++c) bits.set(static_cast<unsigned char>(c));
      bits.set('_');
      break;
    case 's': case 'S':
      bits.set(' ');
      bits.set('\t');
      break;
    default:
      break;
  }
  if (escape == 'D' || escape == 'W' || escape == 'S') bits = printable() & ~bits;
  return bits;
}

bool is_class_escape(char c) {
  return c == 'd' || c == 'D' || c == 'w' || c == 'W' || c == 's' || c == 'S';
}

Node literal(char c) {
  Node n;
  n.kind = Kind::kLiteral;
  n.chars.assign(1, c);
  return n;
}

Node set_node(const CharBits& bits) {
  Node n;
  n.kind = Kind::kSet;
  n.chars = bits_to_chars(bits);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse() {
    if (!text_.empty() && text_.front() == '^') ++pos_;
    end_ = text_.size();
    if (end_ > pos_ && text_.back() == '$' && !escaped_at(end_ - 1)) --end_;
    Node root = parse_alternation();
    if (pos_ < end_) {
      if (text_[pos_] == ')') throw PatternError("unmatched ')'", pos_);
      throw PatternError("unexpected character", pos_);
    }
    return root;
  }

 private:
  bool escaped_at(std::size_t i) const {
    std::size_t backslashes = 0;
    while (i > backslashes && text_[i - backslashes - 1] == '\\') ++backslashes;
    return backslashes % 2 == 1;
  }

  bool at_end() const { return pos_ >= end_; }
  char peek() const { return text_[pos_]; }

  Node parse_alternation() {
    std::vector<Node> branches;
    branches.push_back(parse_concat());
    while (!at_end() && peek() == '|') {
      ++pos_;
      branches.push_back(parse_concat());
    }
    if (branches.size() == 1) return std::move(branches.front());
    Node n;
    n.kind = Kind::kAlternation;
    n.children = std::move(branches);
    return n;
  }

  Node parse_concat() {
    Node n;
    n.kind = Kind::kConcat;
    while (!at_end() && peek() != '|' && peek() != ')') {
      n.children.push_back(parse_repeat());
    }
    return n;
  }

  Node parse_repeat() {
    if (is_quantifier_start(peek())) throw PatternError("nothing to repeat", pos_);
    Node atom = parse_atom();
    if (at_end() || !is_quantifier_start(peek())) return atom;
    const std::size_t quantifier_pos = pos_;
    std::size_t lo = 0;
    std::size_t hi = Pattern::kUnbounded;
    const char q = peek();
    ++pos_;
    if (q == '?') {
      hi = 1;
    } else if (q == '+') {
      lo = 1;
    } else if (q == '{') {
      lo = parse_number(quantifier_pos);
      if (!at_end() && peek() == ',') {
        ++pos_;
        if (!at_end() && peek() != '}') hi = parse_number(quantifier_pos);
      } else {
        hi = lo;
      }
      if (at_end() || peek() != '}') throw PatternError("malformed quantifier", quantifier_pos);
      ++pos_;
      if (hi < lo) throw PatternError("quantifier bounds out of order", quantifier_pos);
    }
    if (!at_end() && peek() == '?') ++pos_;  // lazy modifier; irrelevant for sampling
    if (!at_end() && is_quantifier_start(peek())) {
      throw PatternError("nothing to repeat", pos_);
    }
    Node n;
    n.kind = Kind::kRepeat;
    n.min_repeat = lo;
    n.max_repeat = hi;
    n.children.push_back(std::move(atom));
    return n;
  }

  static bool is_quantifier_start(char c) {
    return c == '?' || c == '*' || c == '+' || c == '{';
  }

  std::size_t parse_number(std::size_t quantifier_pos) {
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + static_cast<std::size_t>(peek() - '0');
      if (value > 100000) throw PatternError("quantifier bound too large", quantifier_pos);
      ++pos_;
    }
    if (pos_ == start) throw PatternError("malformed quantifier", quantifier_pos);
    return value;
  }

  Node parse_atom() {
    const std::size_t start = pos_;
    const char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        if (!at_end() && peek() == '?') {
          if (pos_ + 1 < end_ && text_[pos_ + 1] == ':') {
            pos_ += 2;
          } else {
            throw PatternError("unsupported group modifier", start);
          }
        }
        Node inner = parse_alternation();
        if (at_end() || peek() != ')') throw PatternError("unclosed group", start);
        ++pos_;
        return inner;
      }
      case '[':
        return parse_class();
      case '.':
        ++pos_;
        return set_node(printable());
      case '\\':
        return parse_escape();
      case '^':
      case '$':
        throw PatternError("anchor inside pattern is not supported", start);
      case ']':
      case '}':
        ++pos_;
        return literal(c);
      default:
        ++pos_;
        return literal(c);
    }
  }

  Node parse_escape() {
    const std::size_t start = pos_;
    ++pos_;
    if (at_end()) throw PatternError("dangling escape", start);
    const char c = peek();
    ++pos_;
    if (is_class_escape(c)) return set_node(class_bits(c));
    if (auto control = control_escape(c)) return literal(*control);
    if (c == 'b' || c == 'B') throw PatternError("word boundary is not supported", start);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      throw PatternError("backreference is not supported", start);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      throw PatternError(std::string("unsupported escape \\") + c, start);
    }
    return literal(c);
  }

  static std::optional<char> control_escape(char c) {
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'f': return '\f';
      case 'v': return '\v';
      default: return std::nullopt;
    }
  }

  Node parse_class() {
    const std::size_t start = pos_;
    ++pos_;
    bool negated = false;
    if (!at_end() && peek() == '^') {
      negated = true;
      ++pos_;
    }
    CharBits bits;
    bool first = true;
    while (true) {
      if (at_end()) throw PatternError("unclosed character class", start);
      if (peek() == ']') {
        if (first) throw PatternError("empty character class", start);
        ++pos_;
        break;
      }
      first = false;
      const std::size_t item_pos = pos_;
      std::optional<char> lo = class_char(bits);
      if (!lo) continue;  // a \d-style set was merged into `bits`
      if (pos_ + 1 < end_ && peek() == '-' && text_[pos_ + 1] != ']') {
        ++pos_;
        CharBits ignored;
        std::optional<char> hi = class_char(ignored);
        if (!hi) throw PatternError("invalid range endpoint", item_pos);
        if (*hi < *lo) throw PatternError("character range out of order", item_pos);
        for (int ch = *lo; ch <= *hi; ++ch) set_char(bits, static_cast<char>(ch), item_pos);
      } else {
        set_char(bits, *lo, item_pos);
      }
    }
    if (negated) bits = printable() & ~bits;
    if (bits.none()) throw PatternError("character class matches nothing", start);
    return set_node(bits);
  }

  static void set_char(CharBits& bits, char c, std::size_t pos) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= bits.size()) throw PatternError("non-ASCII character in class", pos);
    bits.set(u);
  }

  // Reads one class member. Returns nullopt if it was a shorthand set, which
  // is merged into `bits` directly.
  std::optional<char> class_char(CharBits& bits) {
    const std::size_t start = pos_;
    const char c = peek();
    ++pos_;
    if (c != '\\') {
      if (c == '[' && !at_end() && (peek() == ':' || peek() == '=' || peek() == '.')) {
        throw PatternError("POSIX class syntax is not supported", start);
      }
      return c;
    }
    if (at_end()) throw PatternError("dangling escape", start);
    const char e = peek();
    ++pos_;
    if (is_class_escape(e)) {
      bits |= class_bits(e);
      return std::nullopt;
    }
    if (auto control = control_escape(e)) return *control;
    if (std::isalnum(static_cast<unsigned char>(e))) {
      throw PatternError(std::string("unsupported escape \\") + e, start);
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > Pattern::kUnbounded / a) return Pattern::kUnbounded;
  return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return a > Pattern::kUnbounded - b ? Pattern::kUnbounded : a + b;
}

std::size_t node_min(const Node& n) {
  switch (n.kind) {
    case Kind::kLiteral:
    case Kind::kSet:
      return 1;
    case Kind::kConcat: {
      std::size_t total = 0;
      for (const auto& c : n.children) total = saturating_add(total, node_min(c));
      return total;
    }
    case Kind::kAlternation: {
      std::size_t best = Pattern::kUnbounded;
      for (const auto& c : n.children) best = std::min(best, node_min(c));
      return best;
    }
    case Kind::kRepeat:
      return saturating_mul(node_min(n.children.front()), n.min_repeat);
  }
  return 0;
}

// kUnbounded means unbounded.
std::size_t node_max(const Node& n) {
  switch (n.kind) {
    case Kind::kLiteral:
    case Kind::kSet:
      return 1;
    case Kind::kConcat: {
      std::size_t total = 0;
      for (const auto& c : n.children) total = saturating_add(total, node_max(c));
      return total;
    }
    case Kind::kAlternation: {
      std::size_t best = 0;
      for (const auto& c : n.children) best = std::max(best, node_max(c));
      return best;
    }
    case Kind::kRepeat: {
      const std::size_t child = node_max(n.children.front());
      if (child == 0) return 0;
      if (n.max_repeat == Pattern::kUnbounded) return Pattern::kUnbounded;
      return saturating_mul(child, n.max_repeat);
    }
  }
  return 0;
}

struct SampleBudget {
  // Extra repetitions permitted beyond a repeat's minimum, in units of its
  // child's minimum length.
  std::optional<std::size_t> length_slack;
  std::size_t unbounded_slack = kDefaultRepeatSlack;
};

void sample_node(const Node& n, Rng& rng, const SampleBudget& budget, std::string& out) {
  switch (n.kind) {
    case Kind::kLiteral:
      out += n.chars;
      return;
    case Kind::kSet:
      out.push_back(n.chars[rng.index(n.chars.size())]);
      return;
    case Kind::kConcat:
      for (const auto& c : n.children) sample_node(c, rng, budget, out);
      return;
    case Kind::kAlternation:
      sample_node(n.children[rng.index(n.children.size())], rng, budget, out);
      return;
    case Kind::kRepeat: {
      const Node& child = n.children.front();
      std::size_t hi = n.max_repeat;
      if (hi == Pattern::kUnbounded) hi = saturating_add(n.min_repeat, budget.unbounded_slack);
      if (budget.length_slack) {
        const std::size_t unit = std::max<std::size_t>(1, node_min(child));
        hi = std::min(hi, saturating_add(n.min_repeat, *budget.length_slack / unit));
      }
      const auto count = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(n.min_repeat), static_cast<std::int64_t>(hi)));
      for (std::size_t i = 0; i < count; ++i) sample_node(child, rng, budget, out);
      return;
    }
  }
}

}  // namespace

Pattern Pattern::parse(std::string_view text) {
  Parser parser(text);
  return Pattern(std::string(text), parser.parse());
}

std::size_t Pattern::min_length() const { return node_min(root_); }

std::optional<std::size_t> Pattern::max_length() const {
  const std::size_t m = node_max(root_);
  if (m == kUnbounded) return std::nullopt;
  return m;
}

std::string Pattern::sample(Rng& rng) const {
  std::string out;
  sample_node(root_, rng, SampleBudget{}, out);
  return out;
}

std::string Pattern::sample(Rng& rng, std::optional<std::size_t> size_min,
                            std::optional<std::size_t> size_max) const {
  if (!size_min && !size_max) return sample(rng);
  const std::size_t lo = size_min.value_or(0);
  const std::size_t hi = size_max.value_or(kUnbounded);
  const std::size_t shortest = min_length();
  const std::size_t longest = node_max(root_);
  if (shortest > hi || longest < lo || lo > hi) {
    throw GenerationError("pattern '" + text_ + "' cannot satisfy size bounds [" +
                          std::to_string(lo) + ", " +
                          (size_max ? std::to_string(hi) : std::string("inf")) + "]");
  }
  SampleBudget budget;
  if (size_max) budget.length_slack = hi - shortest;
  if (lo > shortest) budget.unbounded_slack = lo - shortest + kDefaultRepeatSlack;
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    std::string out;
    sample_node(root_, rng, budget, out);
    if (out.size() >= lo && out.size() <= hi) return out;
  }
  throw GenerationError("pattern '" + text_ + "' produced no string within size bounds after " +
                        std::to_string(kMaxSampleAttempts) + " attempts");
}

std::string pattern_sample(std::string_view pattern, Rng& rng) {
  return Pattern::parse(pattern).sample(rng);
}

}  // namespace restcheck
