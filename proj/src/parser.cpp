#include <cctype>
#include <string>
#include <vector>

#include "esl/formula.hpp"

namespace esl {

namespace {

enum class Tok {
  Ident,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Tilde,
  Amp,
  Pipe,
  Arrow,
  LAngles,  // <<
  RAngles,  // >>
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(const std::string& input) : input_(input) { advance(); }

  const Token& current() const { return current_; }

  void advance() {
    skip_space();
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= input_.size()) {
      current_.kind = Tok::End;
      current_.text = "<end of input>";
      return;
    }
    char c = input_[pos_];
    if (static_cast<unsigned char>(c) >= 0x80)
      throw parse_error("non-ASCII input is not allowed", line_, column_);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < input_.size() &&
             (std::isalnum(static_cast<unsigned char>(input_[pos_])) || input_[pos_] == '_'))
        bump();
      current_.kind = Tok::Ident;
      current_.text = input_.substr(start, pos_ - start);
      return;
    }
    switch (c) {
      case '(': one(Tok::LParen, "("); return;
      case ')': one(Tok::RParen, ")"); return;
      case '[': one(Tok::LBracket, "["); return;
      case ']': one(Tok::RBracket, "]"); return;
      case '{': one(Tok::LBrace, "{"); return;
      case '}': one(Tok::RBrace, "}"); return;
      case ',': one(Tok::Comma, ","); return;
      case '.': one(Tok::Dot, "."); return;
      case '~': one(Tok::Tilde, "~"); return;
      case '&': one(Tok::Amp, "&"); return;
      case '|': one(Tok::Pipe, "|"); return;
      case '-':
        if (pos_ + 1 < input_.size() && input_[pos_ + 1] == '>') {
          bump();
          bump();
          current_.kind = Tok::Arrow;
          current_.text = "->";
          return;
        }
        throw parse_error("stray '-'", line_, column_);
      case '<':
        if (pos_ + 1 < input_.size() && input_[pos_ + 1] == '<') {
          bump();
          bump();
          current_.kind = Tok::LAngles;
          current_.text = "<<";
          return;
        }
        throw parse_error("stray '<'", line_, column_);
      case '>':
        if (pos_ + 1 < input_.size() && input_[pos_ + 1] == '>') {
          bump();
          bump();
          current_.kind = Tok::RAngles;
          current_.text = ">>";
          return;
        }
        throw parse_error("stray '>'", line_, column_);
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", line_, column_);
    }
  }

 private:
  void one(Tok kind, const char* text) {
    bump();
    current_.kind = kind;
    current_.text = text;
  }

  void bump() {
    if (input_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < input_.size() && (input_[pos_] == ' ' || input_[pos_] == '\t' ||
                                    input_[pos_] == '\r' || input_[pos_] == '\n'))
      bump();
  }

  const std::string& input_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(const std::string& input) : lex_(input) {}

  Formula parse() {
    Formula f = formula();
    expect_end();
    return f;
  }

 private:
  Lexer lex_;

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error(msg + " (found '" + lex_.current().text + "')", lex_.current().line,
                      lex_.current().column);
  }

  bool at(Tok kind) const { return lex_.current().kind == kind; }
  bool at_keyword(const char* kw) const {
    return at(Tok::Ident) && lex_.current().text == kw;
  }

  bool accept(Tok kind) {
    if (!at(kind)) return false;
    lex_.advance();
    return true;
  }

  void expect(Tok kind, const char* what) {
    if (!accept(kind)) fail(std::string("expected ") + what);
  }

  void expect_end() {
    if (!at(Tok::End)) fail("unexpected trailing input");
  }

  std::string ident(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what);
    std::string name = lex_.current().text;
    lex_.advance();
    return name;
  }

  Formula formula() { return implies(); }

  Formula implies() {
    Formula lhs = disjunct();
    if (accept(Tok::Arrow)) return Formula::implies(lhs, implies());
    return lhs;
  }

  Formula disjunct() {
    Formula lhs = conjunct();
    while (accept(Tok::Pipe)) lhs = Formula::lor(lhs, conjunct());
    return lhs;
  }

  Formula conjunct() {
    Formula lhs = unary();
    while (accept(Tok::Amp)) lhs = Formula::land(lhs, unary());
    return lhs;
  }

  ExtendedAgent extended_agent() {
    std::string name = ident("agent name");
    if (name == "env") return ExtendedAgent::environment();
    if (name == "sigma") {
      expect(Tok::LParen, "'(' after sigma");
      std::string base = ident("agent name inside sigma(...)");
      expect(Tok::RParen, "')'");
      return ExtendedAgent::sigma(base);
    }
    return ExtendedAgent::base(name);
  }

  AgentGroup group() {
    expect(Tok::LBrace, "'{'");
    AgentGroup g;
    if (!at(Tok::RBrace)) {
      g.push_back(extended_agent());
      while (accept(Tok::Comma)) g.push_back(extended_agent());
    }
    expect(Tok::RBrace, "'}'");
    return g;
  }

  Formula unary() {
    if (accept(Tok::Tilde)) return Formula::lnot(unary());

    if (at(Tok::LAngles)) return coalition();

    if (at(Tok::Ident)) {
      const std::string& word = lex_.current().text;
      if (word == "AX" || word == "EX" || word == "AF" || word == "EF" || word == "AG" ||
          word == "EG") {
        std::string op = word;
        lex_.advance();
        Formula body = unary();
        if (op == "AX") return Formula::ax(body);
        if (op == "EX") return Formula::ex(body);
        if (op == "AF") return Formula::af(body);
        if (op == "EF") return Formula::ef(body);
        if (op == "AG") return Formula::ag(body);
        return Formula::eg(body);
      }
      if (word == "K") {
        lex_.advance();
        ExtendedAgent who = extended_agent();
        return Formula::knows(who, unary());
      }
      if (word == "D") {
        lex_.advance();
        AgentGroup g = group();
        return Formula::dk(std::move(g), unary());
      }
      if (word == "C") {
        lex_.advance();
        AgentGroup g = group();
        return Formula::ck(std::move(g), unary());
      }
      if (word == "exists" || word == "forall") {
        bool is_exists = word == "exists";
        lex_.advance();
        std::string var = ident("variable name");
        expect(Tok::Dot, "'.' after quantified variable");
        Formula body = formula();  // quantifier scope extends maximally right
        return is_exists ? Formula::exists(var, body) : Formula::forall(var, body);
      }
      // 'E' is either E[phi U psi] or E{G} phi; 'A' only A[phi U psi].
    }
    return atom();
  }

  Formula coalition() {
    expect(Tok::LAngles, "'<<'");
    std::vector<std::string> members;
    members.push_back(coalition_member());
    while (accept(Tok::Comma)) members.push_back(coalition_member());
    expect(Tok::RAngles, "'>>'");
    std::string tag = ident("'_C', '_D' or '_E'");
    Op kind;
    if (tag == "_C")
      kind = Op::CoalitionC;
    else if (tag == "_D")
      kind = Op::CoalitionD;
    else if (tag == "_E")
      kind = Op::CoalitionE;
    else
      fail("expected '_C', '_D' or '_E' after '>>'");
    AgentGroup g = group();
    return Formula::coalition(kind, std::move(members), std::move(g), unary());
  }

  std::string coalition_member() {
    std::string name = ident("base agent name");
    if (name == "env" || name == "sigma")
      fail("coalition members must be base agents");
    return name;
  }

  Formula atom() {
    if (accept(Tok::LParen)) {
      Formula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (!at(Tok::Ident)) fail("expected a formula");
    std::string word = lex_.current().text;

    if (word == "true") {
      lex_.advance();
      return Formula::tt();
    }
    if (word == "false") {
      lex_.advance();
      return Formula::ff();
    }
    if (word == "A" || word == "E") {
      lex_.advance();
      if (word == "E" && at(Tok::LBrace)) {
        AgentGroup g = group();
        return Formula::ek(std::move(g), unary());
      }
      if (!at(Tok::LBracket))
        fail(word == "A" ? "expected '[' after A (the path quantifier appears only as "
                           "A[.. U ..], AX, AF, AG)"
                         : "expected '[' or '{' after E");
      lex_.advance();
      Formula left = formula();
      if (!at_keyword("U")) fail("expected 'U'");
      lex_.advance();
      Formula right = formula();
      expect(Tok::RBracket, "']'");
      return word == "A" ? Formula::au(left, right) : Formula::eu(left, right);
    }
    if (word == "loc") {
      lex_.advance();
      expect(Tok::LParen, "'(' after loc");
      Formula out;
      if (at(Tok::LBrace)) {
        AgentGroup g = group();
        expect(Tok::Comma, "','");
        std::string var = ident("variable name");
        expect(Tok::RParen, "')'");
        out = Formula::loc_group(std::move(g), var);
      } else {
        ExtendedAgent who = extended_agent();
        expect(Tok::Comma, "','");
        std::string var = ident("variable name");
        expect(Tok::RParen, "')'");
        out = Formula::loc(who, var);
      }
      return out;
    }
    if (word == "U" || word == "K" || word == "D" || word == "C" || word == "exists" ||
        word == "forall" || word == "sigma" || word == "env")
      fail("'" + word + "' is a reserved word");
    lex_.advance();
    return Formula::prop(word);
  }
};

}  // namespace

Formula parse_formula(const std::string& text) {
  Parser parser(text);
  return parser.parse();
}

}  // namespace esl
