#ifndef RESTCHECK_ERROR_H_
#define RESTCHECK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace restcheck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or semantic problem in a service spec document. Line and column are
// 1-based; zero means "no position available".
class SpecError : public Error {
 public:
  SpecError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class WorkloadError : public Error {
 public:
  WorkloadError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Regex construct outside the supported subset. `position` is a 0-based
// offset into the pattern text.
class PatternError : public Error {
 public:
  PatternError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class HistoryError : public Error {
 public:
  HistoryError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace restcheck

#endif  // RESTCHECK_ERROR_H_
