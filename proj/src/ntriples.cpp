#include "kgeval/ntriples.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <vector>

namespace kgeval {

namespace {

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

uint32_t parse_hex(std::string_view s, size_t pos, size_t n, size_t line_no) {
  if (pos + n > s.size()) throw ParseError("truncated \\u escape", line_no);
  uint32_t v = 0;
  for (size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    v <<= 4;
    if (c >= '0' && c <= '9')
      v |= static_cast<uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      v |= static_cast<uint32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F')
      v |= static_cast<uint32_t>(c - 'A' + 10);
    else
      throw ParseError("bad hex digit in escape", line_no);
  }
  return v;
}

struct Cursor {
  std::string_view s;
  size_t pos = 0;
  size_t line_no = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  std::string read_iri() {
    ++pos;  // consume '<'
    std::string out;
    while (pos < s.size() && s[pos] != '>') {
      char c = s[pos];
      if (c == '\\' && pos + 1 < s.size() && (s[pos + 1] == 'u' || s[pos + 1] == 'U')) {
        const size_t n = s[pos + 1] == 'u' ? 4 : 8;
        append_utf8(out, parse_hex(s, pos + 2, n, line_no));
        pos += 2 + n;
      } else {
        out.push_back(c);
        ++pos;
      }
    }
    if (pos >= s.size()) throw ParseError("unterminated IRI", line_no);
    ++pos;  // consume '>'
    if (out.empty()) throw ParseError("empty IRI", line_no);
    return out;
  }

  std::string read_blank() {
    const size_t start = pos;
    pos += 2;  // consume "_:"
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '\t' && s[pos] != '.') ++pos;
    if (pos == start + 2) throw ParseError("empty blank node label", line_no);
    return std::string(s.substr(start, pos - start));
  }

  std::string read_literal_body() {
    ++pos;  // consume '"'
    std::string out;
    while (pos < s.size()) {
      char c = s[pos];
      if (c == '"') {
        ++pos;
        return out;
      }
      if (c == '\\') {
        if (pos + 1 >= s.size()) throw ParseError("dangling escape", line_no);
        const char e = s[pos + 1];
        switch (e) {
          case 't': out.push_back('\t'); pos += 2; break;
          case 'b': out.push_back('\b'); pos += 2; break;
          case 'n': out.push_back('\n'); pos += 2; break;
          case 'r': out.push_back('\r'); pos += 2; break;
          case 'f': out.push_back('\f'); pos += 2; break;
          case '"': out.push_back('"'); pos += 2; break;
          case '\'': out.push_back('\''); pos += 2; break;
          case '\\': out.push_back('\\'); pos += 2; break;
          case 'u':
            append_utf8(out, parse_hex(s, pos + 2, 4, line_no));
            pos += 6;
            break;
          case 'U':
            append_utf8(out, parse_hex(s, pos + 2, 8, line_no));
            pos += 10;
            break;
          default: throw ParseError(std::string("unknown escape \\") + e, line_no);
        }
      } else {
        out.push_back(c);
        ++pos;
      }
    }
    throw ParseError("unterminated literal", line_no);
  }

  ObjectTerm read_object() {
    ObjectTerm term;
    const char c = peek();
    if (c == '<') {
      term.kind = TermKind::Iri;
      term.value = read_iri();
    } else if (c == '_' && pos + 1 < s.size() && s[pos + 1] == ':') {
      term.kind = TermKind::Blank;
      term.value = read_blank();
    } else if (c == '"') {
      term.kind = TermKind::Literal;
      term.value = read_literal_body();
      if (pos < s.size() && s[pos] == '@') {
        ++pos;
        const size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '-'))
          ++pos;
        if (pos == start) throw ParseError("empty language tag", line_no);
        term.lang = std::string(s.substr(start, pos - start));
      } else if (pos + 1 < s.size() && s[pos] == '^' && s[pos + 1] == '^') {
        pos += 2;
        if (done() || peek() != '<') throw ParseError("datatype must be an IRI", line_no);
        term.datatype = read_iri();
      }
    } else {
      throw ParseError("expected IRI, blank node, or literal object", line_no);
    }
    return term;
  }
};

}  // namespace

std::optional<Statement> parse_ntriples_line(std::string_view line, size_t line_no) {
  // Tolerate CRLF input.
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  Cursor cur{line, 0, line_no};
  cur.skip_ws();
  if (cur.done() || cur.peek() == '#') return std::nullopt;

  Statement st;
  st.line = line_no;

  if (cur.peek() == '<') {
    st.subject = cur.read_iri();
  } else if (cur.peek() == '_' && cur.pos + 1 < line.size() && line[cur.pos + 1] == ':') {
    st.subject = cur.read_blank();
  } else {
    throw ParseError("expected IRI or blank node subject", line_no);
  }

  cur.skip_ws();
  if (cur.done() || cur.peek() != '<') throw ParseError("expected IRI predicate", line_no);
  st.predicate = cur.read_iri();

  cur.skip_ws();
  if (cur.done()) throw ParseError("missing object", line_no);
  st.object = cur.read_object();

  cur.skip_ws();
  if (cur.done() || cur.peek() != '.') throw ParseError("missing terminating '.'", line_no);
  ++cur.pos;
  cur.skip_ws();
  if (!cur.done() && cur.peek() != '#')
    throw ParseError("unexpected content after '.'", line_no);
  return st;
}

struct InputTextStream::Impl {
  FILE* file = nullptr;
  bool gzipped = false;
  z_stream zs{};
  std::vector<unsigned char> in_buf;
  std::string out_buf;  // decompressed bytes not yet consumed
  size_t out_pos = 0;
  bool eof = false;

  static constexpr size_t kChunk = 1 << 16;

  explicit Impl(const std::string& path) {
    file = std::fopen(path.c_str(), "rb");
    if (!file) throw IoError("cannot open " + path);
    unsigned char magic[2] = {0, 0};
    const size_t got = std::fread(magic, 1, 2, file);
    gzipped = got == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
    std::rewind(file);
    if (gzipped) {
      in_buf.resize(kChunk);
      if (inflateInit2(&zs, 15 + 16) != Z_OK) {
        std::fclose(file);
        throw IoError("zlib init failed for " + path);
      }
    }
  }

  ~Impl() {
    if (gzipped) inflateEnd(&zs);
    if (file) std::fclose(file);
  }

  bool fill() {
    if (eof) return false;
    if (!gzipped) {
      char buf[kChunk];
      const size_t got = std::fread(buf, 1, sizeof(buf), file);
      if (got == 0) {
        eof = true;
        return false;
      }
      out_buf.append(buf, got);
      return true;
    }
    while (true) {
      if (zs.avail_in == 0) {
        const size_t got = std::fread(in_buf.data(), 1, in_buf.size(), file);
        if (got == 0) {
          eof = true;
          return false;
        }
        zs.next_in = in_buf.data();
        zs.avail_in = static_cast<uInt>(got);
      }
      char chunk[kChunk];
      zs.next_out = reinterpret_cast<unsigned char*>(chunk);
      zs.avail_out = sizeof(chunk);
      const int rc = inflate(&zs, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END) throw IoError("gzip decompression failed");
      const size_t produced = sizeof(chunk) - zs.avail_out;
      if (produced > 0) {
        out_buf.append(chunk, produced);
        if (rc == Z_STREAM_END) eof = true;
        return true;
      }
      if (rc == Z_STREAM_END) {
        eof = true;
        return false;
      }
    }
  }

  bool getline(std::string& out) {
    while (true) {
      const size_t nl = out_buf.find('\n', out_pos);
      if (nl != std::string::npos) {
        out.assign(out_buf, out_pos, nl - out_pos);
        out_pos = nl + 1;
        if (out_pos > kChunk) {
          out_buf.erase(0, out_pos);
          out_pos = 0;
        }
        return true;
      }
      if (!fill()) {
        if (out_pos < out_buf.size()) {
          out.assign(out_buf, out_pos, out_buf.size() - out_pos);
          out_pos = out_buf.size();
          return true;
        }
        return false;
      }
    }
  }
};

InputTextStream::InputTextStream(const std::string& path) : impl_(new Impl(path)) {}
InputTextStream::~InputTextStream() = default;
bool InputTextStream::getline(std::string& out) { return impl_->getline(out); }

namespace {

template <typename NextLine>
void parse_stream(NextLine&& next_line, ParseMode mode, ParseStats& stats,
                  const StatementSink& sink) {
  std::string line;
  size_t line_no = 0;
  while (next_line(line)) {
    ++line_no;
    ++stats.lines;
    try {
      auto st = parse_ntriples_line(line, line_no);
      if (st) {
        ++stats.statements;
        sink(*st);
      }
    } catch (const ParseError& e) {
      if (mode == ParseMode::Strict) throw;
      ++stats.skipped;
      if (stats.first_error.empty()) {
        stats.first_error = e.what();
        stats.first_error_line = e.line();
      }
    }
  }
}

}  // namespace

void parse_ntriples_file(const std::string& path, ParseMode mode, ParseStats& stats,
                         const StatementSink& sink) {
  InputTextStream in(path);
  parse_stream([&](std::string& line) { return in.getline(line); }, mode, stats, sink);
}

void parse_ntriples_text(std::string_view text, ParseMode mode, ParseStats& stats,
                         const StatementSink& sink) {
  size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= text.size()) return false;
    const size_t nl = text.find('\n', pos);
    const size_t end = nl == std::string_view::npos ? text.size() : nl;
    line.assign(text.substr(pos, end - pos));
    pos = end + (nl == std::string_view::npos ? 0 : 1);
    if (nl == std::string_view::npos) pos = text.size();
    return true;
  };
  parse_stream(next_line, mode, stats, sink);
}

}  // namespace kgeval
