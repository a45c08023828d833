#include "detdag/dsl.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace detdag {

std::string ParseError::format(std::string_view source_name) const {
  std::ostringstream out;
  if (!source_name.empty()) out << source_name << ':';
  out << line << ':' << column << ": " << (kind == Kind::Syntax ? "syntax" : "error") << ": "
      << message;
  if (!snippet.empty()) {
    out << "\n  " << snippet << "\n  " << std::string(static_cast<std::size_t>(column - 1), ' ')
        << '^';
  }
  return out.str();
}

std::string format_number(double value) {
  std::array<char, 512> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  if (ec != std::errc{}) return "0";
  return std::string(buf.data(), end);
}

namespace {

constexpr std::size_t kMaxErrors = 100;

struct Pos {
  int line = 1;
  int column = 1;
};

enum class Tok {
  Ident,
  String,
  Number,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Equals,
  Define,
  Arrow,
  End,
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::Define: return "':='";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0.0;
  Pos pos;
};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Source {
 public:
  explicit Source(std::string_view text) : text_(text) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        std::string_view line = text.substr(start, i - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines_.push_back(line);
        start = i + 1;
      }
    }
  }

  std::string snippet(int line) const {
    if (line < 1 || static_cast<std::size_t>(line) > lines_.size()) return {};
    std::string out;
    for (char c : lines_[static_cast<std::size_t>(line - 1)].substr(0, 200)) {
      out += (static_cast<unsigned char>(c) < 0x20 && c != '\t') ? '?' : c;
    }
    return out;
  }

  // Position of the last byte, used for errors at end of input.
  Pos last() const {
    for (std::size_t l = lines_.size(); l-- > 0;) {
      if (!lines_[l].empty()) return {static_cast<int>(l + 1), static_cast<int>(lines_[l].size())};
    }
    return {};
  }

  std::string_view text() const { return text_; }

 private:
  std::string_view text_;
  std::vector<std::string_view> lines_;
};

class ErrorSink {
 public:
  explicit ErrorSink(const Source& src) : src_(src) {}

  void add(ParseError::Kind kind, Pos pos, std::string message) {
    if (errors_.size() >= kMaxErrors) return;
    errors_.push_back({kind, pos.line, pos.column, std::move(message), src_.snippet(pos.line)});
  }
  bool empty() const { return errors_.empty(); }
  std::vector<ParseError> take() { return std::move(errors_); }

 private:
  const Source& src_;
  std::vector<ParseError> errors_;
};

std::vector<Token> lex(const Source& src, ErrorSink& errors) {
  std::string_view s = src.text();
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t count = 1) {
    for (std::size_t k = 0; k < count && i < s.size(); ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    Pos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance();
      continue;
    }
    if (ident_start(c)) {
      std::size_t start = i;
      while (i < s.size() && ident_char(s[i])) advance();
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), 0.0, pos});
      continue;
    }
    bool signed_number = (c == '-' || c == '+') && i + 1 < s.size() && digit(s[i + 1]);
    if (digit(c) || signed_number) {
      std::size_t start = i;
      advance();
      while (i < s.size() && digit(s[i])) advance();
      if (i + 1 < s.size() && s[i] == '.' && digit(s[i + 1])) {
        advance();
        while (i < s.size() && digit(s[i])) advance();
      }
      std::string text(s.substr(start, i - start));
      double value = 0.0;
      const char* first = text.data() + (text[0] == '+' ? 1 : 0);
      auto [p, ec] = std::from_chars(first, text.data() + text.size(), value);
      if (ec != std::errc{} || p != text.data() + text.size()) {
        errors.add(ParseError::Kind::Syntax, pos, "malformed number '" + text + "'");
      }
      out.push_back({Tok::Number, std::move(text), value, pos});
      continue;
    }
    if (c == '"') {
      advance();
      std::string text;
      bool closed = false;
      while (i < s.size() && s[i] != '\n') {
        if (s[i] == '"') {
          closed = true;
          advance();
          break;
        }
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] != '\n') {
          char e = s[i + 1];
          switch (e) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default:
              errors.add(ParseError::Kind::Syntax, {line, col},
                         std::string("unknown escape '\\") + e + "'");
          }
          advance(2);
          continue;
        }
        text += s[i];
        advance();
      }
      if (!closed) errors.add(ParseError::Kind::Syntax, pos, "unterminated string");
      out.push_back({Tok::String, std::move(text), 0.0, pos});
      continue;
    }
    auto punct = [&](Tok t, std::size_t len) {
      out.push_back({t, std::string(s.substr(i, len)), 0.0, pos});
      advance(len);
    };
    switch (c) {
      case '{': punct(Tok::LBrace, 1); continue;
      case '}': punct(Tok::RBrace, 1); continue;
      case '(': punct(Tok::LParen, 1); continue;
      case ')': punct(Tok::RParen, 1); continue;
      case '[': punct(Tok::LBracket, 1); continue;
      case ']': punct(Tok::RBracket, 1); continue;
      case ',': punct(Tok::Comma, 1); continue;
      case '=': punct(Tok::Equals, 1); continue;
      default: break;
    }
    if (c == ':' && i + 1 < s.size() && s[i + 1] == '=') {
      punct(Tok::Define, 2);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      punct(Tok::Arrow, 2);
      continue;
    }
    auto byte = static_cast<unsigned char>(c);
    std::string shown = (byte >= 0x20 && byte < 0x7f) ? std::string(1, c) : [&] {
      std::ostringstream hex;
      hex << "0x" << std::hex << static_cast<int>(byte);
      return hex.str();
    }();
    errors.add(ParseError::Kind::Syntax, pos, "unexpected character '" + shown + "'");
    advance();
  }
  out.push_back({Tok::End, {}, 0.0, src.last()});
  return out;
}

// ---------------------------------------------------------------------------
// Statements

using AttrValue = std::variant<double, std::string, bool>;

struct Attr {
  std::string key;
  AttrValue value;
  Pos pos;
};

struct NodeStmt {
  NodeId id;
  Pos pos;
  std::optional<FunctionalForm> form;
  std::vector<Pos> arg_pos;
  std::vector<Attr> attrs;
};

struct EdgeStmt {
  NodeId from;
  NodeId to;
  Pos from_pos;
  Pos to_pos;
  std::vector<Attr> attrs;
};

using Stmt = std::variant<NodeStmt, EdgeStmt>;

struct SyntaxError {
  Pos pos;
  std::string message;
};

enum class AttrContext { Node, Edge };

class Parser {
 public:
  Parser(std::vector<Token> tokens, ErrorSink& errors) : toks_(std::move(tokens)), errors_(errors) {}

  std::string name;
  std::vector<Stmt> stmts;

  void run() {
    try {
      header();
    } catch (const SyntaxError& e) {
      errors_.add(ParseError::Kind::Syntax, e.pos, e.message);
      return;
    }
    while (true) {
      const Token& t = peek();
      if (t.type == Tok::RBrace) {
        next();
        break;
      }
      if (t.type == Tok::End) {
        errors_.add(ParseError::Kind::Syntax, t.pos, "expected '}' before end of input");
        return;
      }
      try {
        statement();
      } catch (const SyntaxError& e) {
        errors_.add(ParseError::Kind::Syntax, e.pos, e.message);
        synchronize(e.pos.line);
      }
    }
    if (peek().type != Tok::End) {
      errors_.add(ParseError::Kind::Syntax, peek().pos,
                  "unexpected " + std::string(describe(peek().type)) + " after closing '}'");
    }
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& at, std::string what) {
    throw SyntaxError{at.pos, "expected " + what + ", found " + shown(at)};
  }
  static std::string shown(const Token& t) {
    if (t.type == Tok::Ident || t.type == Tok::Number) return "'" + t.text + "'";
    return std::string(describe(t.type));
  }
  const Token& expect(Tok type) {
    if (peek().type != type) fail(peek(), std::string(describe(type)));
    return next();
  }

  void synchronize(int line) {
    while (peek().type != Tok::End && peek().type != Tok::RBrace && peek().pos.line <= line) next();
  }

  void header() {
    const Token& kw = peek();
    if (kw.type != Tok::Ident || kw.text != "dag") fail(kw, "'dag'");
    next();
    const Token& n = peek();
    if (n.type != Tok::String && n.type != Tok::Ident) fail(n, "graph name");
    name = next().text;
    expect(Tok::LBrace);
  }

  void statement() {
    const Token& first = peek();
    if (first.type != Tok::Ident) fail(first, "statement");
    if (first.text == "node" && peek(1).type == Tok::Ident) {
      next();
      const Token& id = next();
      NodeStmt stmt{id.text, id.pos, std::nullopt, {}, {}};
      stmt.attrs = attrs(AttrContext::Node);
      stmts.emplace_back(std::move(stmt));
      return;
    }
    const Token& id = next();
    if (peek().type == Tok::Define) {
      next();
      NodeStmt stmt{id.text, id.pos, std::nullopt, {}, {}};
      form(stmt);
      stmt.attrs = attrs(AttrContext::Node);
      stmts.emplace_back(std::move(stmt));
      return;
    }
    if (peek().type == Tok::Arrow) {
      next();
      const Token& to = expect(Tok::Ident);
      EdgeStmt stmt{id.text, to.text, id.pos, to.pos, {}};
      stmt.attrs = attrs(AttrContext::Edge);
      stmts.emplace_back(std::move(stmt));
      return;
    }
    fail(peek(), "':=' or '->' after '" + id.text + "'");
  }

  struct Item {
    bool number;
    std::string text;
    double value;
    Pos pos;
  };

  void form(NodeStmt& stmt) {
    const Token& kw = peek();
    static const std::map<std::string, FormKind, std::less<>> kinds{
        {"sum", FormKind::Sum},         {"product", FormKind::Product},
        {"diff", FormKind::Difference}, {"ratio", FormKind::Ratio},
        {"power", FormKind::Power},     {"scale", FormKind::Scale},
        {"threshold", FormKind::Threshold}, {"aggmean", FormKind::AggMean},
        {"aggprev", FormKind::AggPrev}};
    auto it = kw.type == Tok::Ident ? kinds.find(kw.text) : kinds.end();
    if (it == kinds.end()) {
      fail(kw, "form (sum, product, diff, ratio, power, scale, threshold, aggmean, aggprev)");
    }
    next();
    const Token& open = expect(Tok::LParen);
    std::vector<Item> items;
    while (true) {
      const Token& t = peek();
      if (t.type == Tok::Ident) {
        items.push_back({false, t.text, 0.0, t.pos});
      } else if (t.type == Tok::Number) {
        items.push_back({true, t.text, t.number, t.pos});
      } else {
        fail(t, "identifier or number");
      }
      next();
      if (peek().type == Tok::Comma) {
        next();
        continue;
      }
      expect(Tok::RParen);
      break;
    }

    // Signature letters: I identifier, N number, '+' one or more further identifiers,
    // '?' optional trailing number.
    std::string_view sig;
    std::string_view usage;
    switch (it->second) {
      case FormKind::Sum: sig = "II+"; usage = "sum(A, B, ...)"; break;
      case FormKind::Product: sig = "II+"; usage = "product(A, B, ...)"; break;
      case FormKind::Difference: sig = "II"; usage = "diff(minuend, subtrahend)"; break;
      case FormKind::Ratio: sig = "II?"; usage = "ratio(numerator, denominator[, exponent])"; break;
      case FormKind::Power: sig = "IN"; usage = "power(base, exponent)"; break;
      case FormKind::Scale: sig = "IN"; usage = "scale(arg, factor)"; break;
      case FormKind::Threshold: sig = "IN"; usage = "threshold(arg, cutpoint)"; break;
      case FormKind::AggMean: sig = "II"; usage = "aggmean(arg, group)"; break;
      case FormKind::AggPrev: sig = "INI"; usage = "aggprev(arg, cutpoint, group)"; break;
    }
    FunctionalForm f{it->second, {}, it->second == FormKind::Ratio ? 1.0 : 0.0};
    auto bad = [&](Pos where) {
      throw SyntaxError{where, "malformed form, expected " + std::string(usage)};
    };
    std::size_t k = 0;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      char want = sig[s];
      if (want == '+') {
        while (k < items.size() && !items[k].number) {
          f.args.push_back(items[k].text);
          stmt.arg_pos.push_back(items[k].pos);
          ++k;
        }
        continue;
      }
      if (want == '?') {
        if (k < items.size() && items[k].number) f.constant = items[k++].value;
        continue;
      }
      if (k >= items.size()) bad(open.pos);
      const Item& item = items[k];
      if ((want == 'N') != item.number) bad(item.pos);
      if (item.number) {
        f.constant = item.value;
      } else {
        f.args.push_back(item.text);
        stmt.arg_pos.push_back(item.pos);
      }
      ++k;
    }
    if (k != items.size()) bad(items[k].pos);
    stmt.form = std::move(f);
  }

  std::vector<Attr> attrs(AttrContext ctx) {
    std::vector<Attr> out;
    if (peek().type != Tok::LBracket) return out;
    next();
    while (true) {
      const Token& key = peek();
      if (key.type != Tok::Ident) fail(key, "attribute name");
      next();
      static const std::set<std::string, std::less<>> node_keys{"label", "time", "mean", "sd", "fixed"};
      bool allowed = ctx == AttrContext::Node ? node_keys.count(key.text) > 0 : key.text == "coef";
      if (!allowed) {
        throw SyntaxError{key.pos, "unknown attribute '" + key.text + "' for " +
                                       (ctx == AttrContext::Node
                                            ? "a node (label, time, mean, sd, fixed)"
                                            : "an arc (coef)")};
      }
      expect(Tok::Equals);
      const Token& v = peek();
      if (key.text == "label") {
        if (v.type != Tok::String) fail(v, "string value for label");
        out.push_back({key.text, v.text, key.pos});
      } else if (key.text == "fixed") {
        if (v.type != Tok::Ident || (v.text != "true" && v.text != "false")) fail(v, "true or false");
        out.push_back({key.text, v.text == "true", key.pos});
      } else {
        if (v.type != Tok::Number) fail(v, "number value for " + key.text);
        out.push_back({key.text, v.number, key.pos});
      }
      next();
      if (peek().type == Tok::Comma) {
        next();
        continue;
      }
      expect(Tok::RBracket);
      return out;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ErrorSink& errors_;
};

// ---------------------------------------------------------------------------
// Semantic resolution

struct Decl {
  NodeDef def;
  Pos pos;
  bool declared = false;  // via `node`
  bool defined = false;   // via `:=`
  std::set<std::string> keys;
};

class Resolver {
 public:
  Resolver(const Parser& p, ErrorSink& errors) : p_(p), errors_(errors) {}

  std::optional<Dag> run() {
    for (const auto& s : p_.stmts) {
      if (const auto* n = std::get_if<NodeStmt>(&s)) declare(*n);
    }
    for (const auto& s : p_.stmts) {
      if (const auto* n = std::get_if<NodeStmt>(&s); n && n->form) {
        for (std::size_t i = 0; i < n->form->args.size(); ++i) known(n->form->args[i], n->arg_pos[i]);
      } else if (const auto* e = std::get_if<EdgeStmt>(&s)) {
        known(e->from, e->from_pos);
        known(e->to, e->to_pos);
      }
    }
    if (!errors_.empty()) return std::nullopt;

    DagBuilder builder(p_.name);
    for (const auto& id : order_) builder.add_node(decls_.at(id).def);
    for (const auto& s : p_.stmts) {
      if (const auto* n = std::get_if<NodeStmt>(&s); n && n->form) {
        for (const auto& arg : n->form->args) {
          builder.add_edge({arg, n->id, EdgeKind::Deterministic, std::nullopt});
        }
      } else if (const auto* e = std::get_if<EdgeStmt>(&s)) {
        const NodeDef& child = decls_.at(e->to).def;
        bool defining = child.form && std::find(child.form->args.begin(), child.form->args.end(),
                                                e->from) != child.form->args.end();
        if (defining) {
          // Redundant spelling of a definition arc.
          if (!e->attrs.empty()) {
            errors_.add(ParseError::Kind::Semantic, e->attrs.front().pos,
                        "definition arc " + e->from + " -> " + e->to + " takes no attributes");
          }
          continue;
        }
        std::optional<double> coef;
        for (const auto& a : e->attrs) coef = std::get<double>(a.value);
        builder.add_edge({e->from, e->to, EdgeKind::Probabilistic, coef});
        edge_pos_.emplace(std::make_pair(e->from, e->to), e->from_pos);
      }
    }
    if (!errors_.empty()) return std::nullopt;

    Dag dag = std::move(builder).build();
    for (const auto& v : validate(dag)) {
      errors_.add(ParseError::Kind::Semantic, locate(v), v.message);
    }
    if (!errors_.empty()) return std::nullopt;
    return dag;
  }

 private:
  void declare(const NodeStmt& n) {
    auto [it, fresh] = decls_.try_emplace(n.id);
    Decl& d = it->second;
    if (fresh) {
      order_.push_back(n.id);
      d.def.id = n.id;
      d.pos = n.pos;
    }
    if (n.form) {
      if (d.defined) {
        errors_.add(ParseError::Kind::Semantic, n.pos, "duplicate definition of '" + n.id + "'");
        return;
      }
      d.defined = true;
      d.def.form = n.form;
    } else {
      if (d.declared) {
        errors_.add(ParseError::Kind::Semantic, n.pos, "duplicate declaration of '" + n.id + "'");
        return;
      }
      d.declared = true;
    }
    for (const auto& a : n.attrs) {
      if (!d.keys.insert(a.key).second) {
        errors_.add(ParseError::Kind::Semantic, a.pos,
                    "attribute '" + a.key + "' given twice for '" + n.id + "'");
        continue;
      }
      if (a.key == "label") d.def.label = std::get<std::string>(a.value);
      else if (a.key == "fixed") d.def.fixed = std::get<bool>(a.value);
      else if (a.key == "time") d.def.time = std::get<double>(a.value);
      else if (a.key == "mean") d.def.mean = std::get<double>(a.value);
      else if (a.key == "sd") d.def.sd = std::get<double>(a.value);
    }
  }

  void known(const NodeId& id, Pos pos) {
    if (!decls_.count(id)) errors_.add(ParseError::Kind::Semantic, pos, "unknown identifier '" + id + "'");
  }

  Pos locate(const Violation& v) const {
    const auto& loc = v.location;
    for (std::size_t i = 0; i + 1 < loc.size(); ++i) {
      auto it = edge_pos_.find({loc[i], loc[i + 1]});
      if (it != edge_pos_.end()) return it->second;
    }
    std::string target = loc.size() == 2 && v.code != ViolationCode::Cycle ? loc[1]
                         : loc.empty()                                      ? std::string()
                                                                            : loc[0];
    auto it = decls_.find(target);
    return it == decls_.end() ? Pos{} : it->second.pos;
  }

  const Parser& p_;
  ErrorSink& errors_;
  std::map<std::string, Decl> decls_;
  std::vector<std::string> order_;
  std::map<std::pair<std::string, std::string>, Pos> edge_pos_;
};

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + '"';
}

std::string form_text(const FunctionalForm& f) {
  std::string out(form_keyword(f.kind));
  out += '(';
  auto join_args = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) out += (i ? ", " : "") + f.args[i];
  };
  switch (f.kind) {
    case FormKind::Sum:
    case FormKind::Product:
    case FormKind::Difference:
    case FormKind::AggMean:
      join_args(f.args.size());
      break;
    case FormKind::Ratio:
      join_args(f.args.size());
      if (f.constant != 1.0) out += ", " + format_number(f.constant);
      break;
    case FormKind::Power:
    case FormKind::Scale:
    case FormKind::Threshold:
      join_args(f.args.size());
      out += ", " + format_number(f.constant);
      break;
    case FormKind::AggPrev:
      out += f.args.empty() ? "" : f.args[0];
      out += ", " + format_number(f.constant);
      if (f.args.size() > 1) out += ", " + f.args[1];
      break;
  }
  return out + ')';
}

}  // namespace

ParseResult parse(std::string_view source) {
  Source src(source);
  ErrorSink errors(src);
  Parser parser(lex(src, errors), errors);
  parser.run();
  if (!errors.empty()) return {std::nullopt, errors.take()};
  Resolver resolver(parser, errors);
  auto dag = resolver.run();
  if (!dag) return {std::nullopt, errors.take()};
  return {std::move(dag), {}};
}

Dag parse_or_throw(std::string_view source) {
  auto result = parse(source);
  if (!result.ok()) {
    std::string what = "parse failed";
    if (!result.errors.empty()) what = result.errors.front().format();
    throw ParseFailure(std::move(what), std::move(result.errors));
  }
  return std::move(*result.dag);
}

Dag load_dag_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto result = parse(buf.str());
  if (!result.ok()) {
    std::string what;
    for (const auto& e : result.errors) what += e.format(path.string()) + "\n";
    throw ParseFailure(std::move(what), std::move(result.errors));
  }
  return std::move(*result.dag);
}

std::string serialize(const Dag& dag) {
  std::string out = "dag " + quote_string(dag.name()) + " {\n";
  for (const auto& n : dag.nodes()) {
    out += "  ";
    out += n.form ? n.id + " := " + form_text(*n.form) : "node " + n.id;
    std::vector<std::string> attrs;
    if (n.label) attrs.push_back("label=" + quote_string(*n.label));
    if (n.time) attrs.push_back("time=" + format_number(*n.time));
    if (n.mean) attrs.push_back("mean=" + format_number(*n.mean));
    if (n.sd) attrs.push_back("sd=" + format_number(*n.sd));
    if (n.fixed) attrs.push_back("fixed=true");
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) out += (i ? ", " : "") + attrs[i];
      out += ']';
    }
    out += '\n';
  }
  for (const auto& e : dag.edges()) {
    if (e.kind == EdgeKind::Deterministic) continue;
    out += "  " + e.from + " -> " + e.to;
    if (e.coef) out += " [coef=" + format_number(*e.coef) + "]";
    out += '\n';
  }
  out += "}\n";
  return out;
}

}  // namespace detdag
