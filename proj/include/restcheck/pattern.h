#ifndef RESTCHECK_PATTERN_H_
#define RESTCHECK_PATTERN_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restcheck/rng.h"

namespace restcheck {

// A regular expression restricted to a generative subset: literals, escapes,
// '.', character classes (with ranges and negation), groups, alternation and
// the quantifiers ?, *, +, {n}, {m,}, {m,n}. Leading '^' and trailing '$' are
// accepted and ignored. Strings are produced by sampling the syntax tree
// directly rather than by generate-and-test.
class Pattern {
 public:
  static Pattern parse(std::string_view text);

  const std::string& text() const { return text_; }
  std::size_t min_length() const;
  // nullopt when the language contains arbitrarily long strings.
  std::optional<std::size_t> max_length() const;

  std::string sample(Rng& rng) const;
  // Samples a string whose length lies in [size_min, size_max]. Unbounded
  // repetitions are stretched to reach the bounds; residual misses are
  // rejected and retried a bounded number of times before GenerationError.
  std::string sample(Rng& rng, std::optional<std::size_t> size_min,
                     std::optional<std::size_t> size_max) const;

  struct Node {
    enum class Kind { kLiteral, kSet, kConcat, kAlternation, kRepeat };
    Kind kind = Kind::kConcat;
    std::string chars;  // kLiteral: one char; kSet: the members
    std::vector<Node> children;
    std::size_t min_repeat = 0;
    std::size_t max_repeat = 0;  // kUnbounded when open-ended
  };
  static constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

 private:
  Pattern(std::string text, Node root) : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  Node root_;
};

// Convenience wrapper: parse and sample once.
std::string pattern_sample(std::string_view pattern, Rng& rng);

}  // namespace restcheck

#endif  // RESTCHECK_PATTERN_H_
