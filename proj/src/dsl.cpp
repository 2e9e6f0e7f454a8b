#include "starkit/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace starkit {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Expr parse_top() {
    Expr e = expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input", {"end of input"});
    return e;
  }

  Coefficient parse_num_top() {
    Coefficient c = num();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input", {"end of input"});
    return c;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(pos_ >= text_.size() ? msg + " at end of input" : msg, line, column, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail("unexpected token", {std::string("'") + c + "'"});
    ++pos_;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  Expr expr() {
    skip_ws();
    const std::size_t start = pos_;
    const std::string name = identifier();
    static const std::vector<std::string> kinds = {"abs", "min", "max", "gm", "scale"};
    if (name == "abs") {
      expect('(');
      Coefficient a = num();
      expect(',');
      Coefficient b = num();
      expect(')');
      if (a.is_zero() && b.is_zero()) {
        pos_ = start;
        fail("abs(0,0) is not a linear form", {});
      }
      return Expr::abs(a, b);
    }
    if (name == "scale") {
      expect('(');
      const std::size_t at = pos_;
      Coefficient c = num();
      if (c.sign() <= 0) {
        pos_ = at;
        skip_ws();
        fail("scale factor must be positive", {"positive number"});
      }
      expect(',');
      Expr child = expr();
      expect(')');
      return Expr::scale(c, std::move(child));
    }
    if (name == "min" || name == "max" || name == "gm") {
      expect('(');
      std::vector<Expr> children;
      if (peek(')')) {
        throw ArityError(name + " needs at least one argument");
      }
      children.push_back(expr());
      while (peek(',')) {
        ++pos_;
        children.push_back(expr());
      }
      expect(')');
      if (name == "min") return Expr::min(std::move(children));
      if (name == "max") return Expr::max(std::move(children));
      return Expr::gm(std::move(children));
    }
    pos_ = start;
    fail(name.empty() ? "expected an expression" : "unknown function '" + name + "'", kinds);
  }

  Coefficient num() {
    skip_ws();
    int sign = 1;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      if (text_[pos_] == '-') sign = -1;
      ++pos_;
    }
    Coefficient c = factor();
    while (peek('*')) {
      ++pos_;
      c = c * factor();
    }
    return sign < 0 ? -c : c;
  }

  Coefficient factor() {
    skip_ws();
    static const std::vector<std::string> expected = {"number", "p/q", "sqrt2", "sqrt3", "invsqrt2"};
    if (pos_ >= text_.size()) fail("expected a number", expected);
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      const std::string name = identifier();
      if (name == "invsqrt2") return Coefficient(Rational(1, 2), 2);
      if (name.size() > 4 && name.compare(0, 4, "sqrt") == 0) {
        const std::string digits = name.substr(4);
        if (std::all_of(digits.begin(), digits.end(), [](char d) { return std::isdigit(static_cast<unsigned char>(d)); }) &&
            digits.size() <= 9 && digits[0] != '0') {
          return Coefficient::sqrt_of(std::stoll(digits));
        }
      }
      pos_ = start;
      fail("unknown constant '" + name + "'", expected);
    }
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') fail("expected a number", expected);
    const std::size_t start = pos_;
    auto numeral = [&]() {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
      return text_.substr(s, pos_ - s);
    };
    const auto num_text = numeral();
    auto value = parse_exact_rational(num_text);
    if (!value) {
      pos_ = start;
      fail("malformed or out-of-range number '" + num_text + "'", expected);
    }
    if (pos_ < text_.size() && text_[pos_] == '/') {
      ++pos_;
      const std::size_t den_start = pos_;
      const auto den_text = numeral();
      auto den = parse_exact_rational(den_text);
      if (!den || den->numerator() == 0) {
        pos_ = den_start;
        fail("malformed denominator", {"nonzero number"});
      }
      try {
        *value /= *den;
      } catch (const std::exception&) {
        pos_ = start;
        fail("number out of range", expected);
      }
    }
    return Coefficient(*value);
  }

  const std::string& text_;
  std::size_t pos_{0};
};

std::string json_number_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number()) return j.dump();
  throw ValidationError("expected a number or numeric string, got " + j.dump());
}

Expr from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("JSON node must be an object with a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "abs") {
    return Expr::abs(parse_coefficient(json_number_text(j.at("a"))), parse_coefficient(json_number_text(j.at("b"))));
  }
  if (kind == "scale") {
    const nlohmann::json& child = j.contains("child") ? j.at("child") : j.at("children").at(0);
    return Expr::scale(parse_coefficient(json_number_text(j.at("c"))), from_json(child));
  }
  if (kind == "min" || kind == "max" || kind == "gm") {
    std::vector<Expr> children;
    if (j.contains("children")) {
      for (const auto& c : j.at("children")) children.push_back(from_json(c));
    }
    if (kind == "min") return Expr::min(std::move(children));
    if (kind == "max") return Expr::max(std::move(children));
    return Expr::gm(std::move(children));
  }
  throw ValidationError("unknown node kind '" + kind + "' (expected abs, min, max, gm, scale)");
}

nlohmann::json to_json(const Expr& e) {
  nlohmann::json j;
  j["kind"] = node_kind_name(e.kind);
  switch (e.kind) {
    case NodeKind::abs:
      j["a"] = e.form.a.to_string();
      j["b"] = e.form.b.to_string();
      break;
    case NodeKind::scale:
      j["c"] = e.factor.to_string();
      j["child"] = to_json(e.children.at(0));
      break;
    default:
      j["children"] = nlohmann::json::array();
      for (const auto& c : e.children) j["children"].push_back(to_json(c));
  }
  return j;
}

}  // namespace

Expr parse_distance_function(const std::string& text) { return Parser(text).parse_top(); }

Coefficient parse_coefficient(const std::string& text) { return Parser(text).parse_num_top(); }

Expr parse_distance_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(err.what(), 1, static_cast<int>(err.byte), {"JSON"});
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& err) {
    throw ValidationError(std::string("malformed JSON distance function: ") + err.what());
  }
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case NodeKind::abs:
      return "abs(" + e.form.a.to_string() + "," + e.form.b.to_string() + ")";
    case NodeKind::scale:
      return "scale(" + e.factor.to_string() + "," + print_expr(e.children.at(0)) + ")";
    default: {
      std::string out = node_kind_name(e.kind);
      out += "(";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ",";
        out += print_expr(e.children[i]);
      }
      return out + ")";
    }
  }
}

std::string expr_to_json(const Expr& e) { return to_json(e).dump(); }

std::string DistanceFunction::to_string() const { return print_expr(expr_); }

Expr load_distance_function(const std::string& source) {
  if (source == "height") return builtin::height();
  if (source == "multiplicative" || source == "mult") return builtin::multiplicative();
  if (source == "unionjack" || source == "union_jack") return builtin::union_jack();
  if (source == "cusp") return builtin::irrational_cusp();
  std::string text = source;
  std::error_code ec;
  if (source.find('(') == std::string::npos && source.find('{') == std::string::npos) {
    if (!std::filesystem::is_regular_file(source, ec)) {
      // "height.df" with no such file falls back to the builtin of that name.
      const auto stem = std::filesystem::path(source).stem().string();
      if (stem != source && std::filesystem::path(source).extension() == ".df") return load_distance_function(stem);
      throw ValidationError("distance function '" + source + "' is neither a builtin, a file, nor an expression");
    }
    std::ifstream in(source);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_distance_json(text);
  return parse_distance_function(text);
}

}  // namespace starkit
