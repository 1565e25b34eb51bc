#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "leafavg/polynomial.hpp"

namespace leafavg {

/// Writes p as `c * x1^a1 * x2^a2 + ...` in graded lexicographic order.
/// Unit coefficients are omitted, rational coefficients print as `p/q`.
template <class S>
std::string to_string(const Polynomial<S>& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    const bool negative = c < S(0);
    const S mag = negative ? S(-c) : c;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    std::string mono;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "x" + std::to_string(i + 1);
      if (e[i] > 1) mono += "^" + std::to_string(e[i]);
    }
    if (mono.empty()) {
      out += format_scalar(mag);
    } else if (mag == S(1)) {
      out += mono;
    } else {
      out += format_scalar(mag) + "*" + mono;
    }
  }
  return out;
}

namespace detail {

template <class S>
class PolynomialParser {
 public:
  PolynomialParser(std::string_view text, std::size_t dim) : dim_(dim) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) continue;
      src_ += text[i];
      col_.push_back(i + 1);
    }
  }

  Polynomial<S> parse() {
    Polynomial<S> out(dim_);
    require(!src_.empty(), ErrorKind::ParseError, "empty polynomial text");
    bool first = true;
    while (pos_ < src_.size()) {
      bool negative = false;
      if (peek() == '+' || peek() == '-') {
        negative = peek() == '-';
        ++pos_;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      auto [e, c] = term();
      out.add_term(e, negative ? S(-c) : c);
    }
    return out;
  }

 private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const {
    const std::size_t column = pos_ < col_.size() ? col_[pos_] : (col_.empty() ? 1 : col_.back() + 1);
    throw Error(ErrorKind::ParseError, what + " at column " + std::to_string(column));
  }

  std::pair<Exponents, S> term() {
    Exponents e(dim_);
    S c(1);
    bool any = false;
    while (pos_ < src_.size()) {
      const char ch = peek();
      if (ch == '+' || ch == '-') {
        // Only a sign immediately following '*' or an exponent marker belongs to
        // this term; otherwise it starts the next one.
        break;
      }
      if (ch == '*') {
        if (!any) fail("unexpected '*'");
        ++pos_;
        continue;
      }
      if (ch == 'x' || ch == 'X') {
        ++pos_;
        const std::size_t idx = integer("variable index");
        if (idx < 1 || idx > dim_) fail("variable x" + std::to_string(idx) + " outside 1.." + std::to_string(dim_));
        unsigned power = 1;
        if (peek() == '^') {
          ++pos_;
          power = static_cast<unsigned>(integer("exponent"));
        }
        e[idx - 1] += power;
      } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        c *= number();
      } else if (ch == '(' || ch == ')') {
        fail("parentheses are not part of the polynomial format");
      } else {
        fail(std::string("unexpected character '") + ch + "'");
      }
      any = true;
    }
    if (!any) fail("empty term");
    return {e, c};
  }

  std::size_t integer(const char* what) {
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what);
    return static_cast<std::size_t>(std::stoull(src_.substr(start, pos_ - start)));
  }

  S number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') ++pos_;
    };
    digits();
    if (peek() == 'e' || peek() == 'E') {
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      digits();
    } else if (peek() == '/') {
      ++pos_;
      digits();
    }
    try {
      return parse_scalar<S>(std::string_view(src_).substr(start, pos_ - start));
    } catch (const Error&) {
      pos_ = start;
      fail("malformed number");
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  std::size_t dim_;
  std::string src_;
  std::vector<std::size_t> col_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the text format written by to_string. Whitespace is ignored, `*`
/// between factors is optional, coefficients may be `p/q` or decimals.
template <class S>
Polynomial<S> parse_polynomial(std::string_view text, std::size_t dim) {
  return detail::PolynomialParser<S>(text, dim).parse();
}

}  // namespace leafavg
