#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "kgeval/common.hpp"

namespace kgeval {

enum class TermKind : uint8_t { Iri, Blank, Literal };

struct ObjectTerm {
  TermKind kind = TermKind::Iri;
  std::string value;     // IRI, blank-node label ("_:" prefixed), or literal lexical form
  std::string lang;      // language tag, empty unless literal
  std::string datatype;  // datatype IRI, empty unless literal
};

struct Statement {
  std::string subject;    // IRI or "_:" blank-node label
  std::string predicate;  // IRI
  ObjectTerm object;
  size_t line = 0;
};

enum class ParseMode { Lenient, Strict };

struct ParseStats {
  size_t lines = 0;
  size_t statements = 0;
  size_t skipped = 0;  // malformed lines in lenient mode
  std::string first_error;
  size_t first_error_line = 0;
};

// Parses one statement line. Returns nullopt for blank lines and comments.
// Throws ParseError on malformed input.
std::optional<Statement> parse_ntriples_line(std::string_view line, size_t line_no);

// Line reader over a plain or gzip-compressed file (gzip detected by magic bytes).
class InputTextStream {
 public:
  explicit InputTextStream(const std::string& path);
  ~InputTextStream();
  InputTextStream(const InputTextStream&) = delete;
  InputTextStream& operator=(const InputTextStream&) = delete;

  // Reads the next line without the terminator. Returns false at end of input.
  bool getline(std::string& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

using StatementSink = std::function<void(const Statement&)>;

// Single-pass streaming parse. Lenient mode skips malformed lines and counts
// them in stats; strict mode rethrows the first ParseError.
void parse_ntriples_file(const std::string& path, ParseMode mode, ParseStats& stats,
                         const StatementSink& sink);
void parse_ntriples_text(std::string_view text, ParseMode mode, ParseStats& stats,
                         const StatementSink& sink);

}  // namespace kgeval
