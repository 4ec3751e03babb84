#include "haai/syntax/reader.hpp"

#include <charconv>
#include <limits>

namespace haai::syntax {
namespace {

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '|' || c == '"' || c == ';' || c == ' ' || c == '\t' ||
         c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Reader {
 public:
  Reader(std::string_view text, std::string_view file) : text_(text), file_(file) {}

  std::vector<Datum> read_all() {
    std::vector<Datum> out;
    while (true) {
      skip_atmosphere();
      if (at_end()) break;
      if (peek() == ')') throw Error(ErrorCode::UnbalancedParens, "unexpected ')'", span_here(1));
      out.push_back(read_datum());
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  SourceSpan span_here(std::uint32_t length) const {
    return SourceSpan{std::string(file_), line_, column_, length};
  }

  void skip_atmosphere() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else {
        break;
      }
    }
  }

  Datum read_datum() {
    char c = peek();
    if (c == '(') return read_list();
    if (c == '"') return read_string();
    if (c == '|') {
      SourceSpan span = span_here(1);
      advance();
      return Datum{Symbol{"|"}, span};
    }
    return read_atom();
  }

  Datum read_list() {
    SourceSpan open = span_here(1);
    std::size_t start = pos_;
    advance();
    DatumList items;
    while (true) {
      skip_atmosphere();
      if (at_end()) throw Error(ErrorCode::UnbalancedParens, "missing ')'", open);
      if (peek() == ')') {
        advance();
        break;
      }
      items.push_back(read_datum());
    }
    open.length = static_cast<std::uint32_t>(pos_ - start);
    return Datum{std::move(items), open};
  }

  Datum read_string() {
    SourceSpan span = span_here(0);
    std::size_t start = pos_;
    advance();
    std::string out;
    while (true) {
      if (at_end()) throw Error(ErrorCode::UnterminatedString, "missing closing '\"'", span);
      char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) throw Error(ErrorCode::UnterminatedString, "dangling escape", span);
        char e = peek();
        advance();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += e; break;
        }
      } else {
        out += c;
      }
    }
    span.length = static_cast<std::uint32_t>(pos_ - start);
    return Datum{std::move(out), span};
  }

  Datum read_atom() {
    SourceSpan span = span_here(0);
    std::size_t start = pos_;
    while (!at_end() && !is_delimiter(peek())) advance();
    std::string_view token = text_.substr(start, pos_ - start);
    span.length = static_cast<std::uint32_t>(token.size());

    if (token == "#t" || token == "#true") return Datum{true, span};
    if (token == "#f" || token == "#false") return Datum{false, span};

    std::size_t digits_at = (token[0] == '+' || token[0] == '-') ? 1 : 0;
    bool numeric = token.size() > digits_at &&
                   (is_digit(token[digits_at]) ||
                    (token[digits_at] == '.' && token.size() > digits_at + 1 &&
                     is_digit(token[digits_at + 1])));
    if (!numeric) return Datum{Symbol{std::string(token)}, span};
    return read_number(token, span);
  }

  static Datum read_number(std::string_view token, const SourceSpan& span) {
    bool decimal = token.find_first_of(".eE") != std::string_view::npos;
    std::string_view body = token[0] == '+' ? token.substr(1) : token;
    const char* first = body.data();
    const char* last = body.data() + body.size();
    if (!decimal) {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec == std::errc::result_out_of_range) {
        throw Error(ErrorCode::InvalidNumber, "integer out of range: " + std::string(token), span);
      }
      if (ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::InvalidNumber, "malformed number: " + std::string(token), span);
      }
      return Datum{value, span};
    }
    double value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorCode::InvalidNumber, "malformed number: " + std::string(token), span);
    }
    return Datum{value, span};
  }

  std::string_view text_;
  std::string_view file_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t column_ = 1;
};

}  // namespace

std::vector<Datum> read_data(std::string_view text, std::string_view file) {
  return Reader(text, file).read_all();
}

}  // namespace haai::syntax
