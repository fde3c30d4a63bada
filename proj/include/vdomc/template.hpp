#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vdomc/error.hpp"

namespace vdomc {

// Dot-separated read-only path into the state (or into an each-item).
struct StatePath {
  std::vector<std::string> segments;

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (i) out += '.';
      out += segments[i];
    }
    return out;
  }

  static StatePath parse(std::string_view dotted) {
    StatePath p;
    std::size_t begin = 0;
    while (begin <= dotted.size() && !dotted.empty()) {
      std::size_t end = dotted.find('.', begin);
      if (end == std::string_view::npos) end = dotted.size();
      p.segments.emplace_back(dotted.substr(begin, end - begin));
      begin = end + 1;
    }
    return p;
  }

  bool operator==(const StatePath&) const = default;
};

struct TemplateNode;
using TemplateList = std::vector<TemplateNode>;

struct ElementT {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> static_attrs;
  std::vector<std::pair<std::string, StatePath>> dynamic_attrs;
  TemplateList children;
};

struct TextT {
  std::string text;
};

struct HoleT {
  StatePath path;
};

// `{#each list as item key=item.k}` with a single-element body. key_path is
// relative to the item; empty means the item itself.
struct EachT {
  StatePath list_path;
  std::string item_name;
  StatePath key_path;
  TemplateList body;
};

struct IfT {
  StatePath cond_path;
  TemplateList then_body;
  TemplateList else_body;
};

struct TemplateNode {
  std::variant<ElementT, TextT, HoleT, EachT, IfT> node;
  bool is_static = false;  // filled in by analyze()
  std::size_t line = 1;
  std::size_t column = 1;
};

struct TemplateAst {
  TemplateNode root;
  std::string source_hash;
};

// FNV-1a, 64 bit, as 16 lowercase hex digits.
inline std::string source_hash(std::string_view source) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : source) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

class TemplateParser {
 public:
  explicit TemplateParser(std::string_view src) : src_(src) {}

  TemplateNode parse_document() {
    skip_ws();
    if (eof()) fail("empty template");
    if (peek() != '<' || peek(1) == '/') fail("template must start with an element");
    TemplateNode root = parse_element();
    skip_ws();
    if (!eof()) fail("template must have exactly one root element");
    return root;
  }

 private:
  enum class End { Eof, CloseTag, EndEach, EndIf, Else };

  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  bool starts_with(std::string_view s) const { return src_.substr(pos_).substr(0, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void expect(std::string_view s) {
    if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
    advance(s.size());
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
  static bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

  std::string parse_ident() {
    if (!ident_start(peek())) fail("expected identifier");
    std::size_t begin = pos_;
    while (ident_char(peek())) advance();
    return std::string(src_.substr(begin, pos_ - begin));
  }

  StatePath parse_path() {
    StatePath p;
    p.segments.push_back(parse_ident());
    while (peek() == '.') {
      advance();
      p.segments.push_back(parse_ident());
    }
    return p;
  }

  std::string parse_tag() {
    std::size_t begin = pos_;
    if (!(peek() >= 'a' && peek() <= 'z')) fail("tag names must be lowercase ascii");
    while ((peek() >= 'a' && peek() <= 'z') || (peek() >= '0' && peek() <= '9') || peek() == '-') advance();
    if (std::isalpha(static_cast<unsigned char>(peek()))) fail("tag names must be lowercase ascii");
    return std::string(src_.substr(begin, pos_ - begin));
  }

  std::string parse_attr_name() {
    auto start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '@'; };
    auto inner = [&](char c) {
      return start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    };
    if (!start(peek())) fail("expected attribute name");
    std::size_t begin = pos_;
    while (inner(peek())) advance();
    return std::string(src_.substr(begin, pos_ - begin));
  }

  TemplateNode make(std::size_t line, std::size_t col) {
    TemplateNode n;
    n.line = line;
    n.column = col;
    return n;
  }

  TemplateNode parse_element() {
    TemplateNode n = make(line_, col_);
    expect("<");
    ElementT el;
    el.tag = parse_tag();
    for (;;) {
      skip_ws();
      if (starts_with("/>")) {
        advance(2);
        n.node = std::move(el);
        return n;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (eof()) fail("unterminated start tag <" + el.tag + ">");
      std::string name = parse_attr_name();
      for (const auto& a : el.static_attrs) {
        if (a.first == name) fail("duplicate attribute '" + name + "'");
      }
      for (const auto& a : el.dynamic_attrs) {
        if (a.first == name) fail("duplicate attribute '" + name + "'");
      }
      skip_ws();
      expect("=");
      skip_ws();
      if (peek() == '"' || peek() == '\'') {
        const char quote = peek();
        advance();
        std::size_t begin = pos_;
        while (!eof() && peek() != quote) advance();
        if (eof()) fail("unterminated attribute value");
        el.static_attrs.emplace_back(std::move(name), std::string(src_.substr(begin, pos_ - begin)));
        advance();
      } else if (peek() == '{') {
        advance();
        skip_ws();
        StatePath p = parse_path();
        skip_ws();
        expect("}");
        el.dynamic_attrs.emplace_back(std::move(name), std::move(p));
      } else {
        fail("attribute value must be quoted or a {path}");
      }
    }
    End end = parse_content(el.children);
    if (end != End::CloseTag) fail("expected </" + el.tag + ">");
    const std::size_t line = line_, col = col_;
    std::string closing = parse_tag();
    if (closing != el.tag) {
      throw ParseError("mismatched closing tag </" + closing + ">, expected </" + el.tag + ">", line, col);
    }
    skip_ws();
    expect(">");
    n.node = std::move(el);
    return n;
  }

  // Reads content up to a terminator, which is consumed (for a close tag, only
  // the "</" prefix is consumed).
  End parse_content(TemplateList& out) {
    for (;;) {
      if (eof()) return End::Eof;
      if (starts_with("</")) {
        advance(2);
        return End::CloseTag;
      }
      if (peek() == '<') {
        out.push_back(parse_element());
        continue;
      }
      if (starts_with("{/each}")) {
        advance(7);
        return End::EndEach;
      }
      if (starts_with("{/if}")) {
        advance(5);
        return End::EndIf;
      }
      if (starts_with("{:else}")) {
        advance(7);
        return End::Else;
      }
      if (starts_with("{#each")) {
        out.push_back(parse_each());
        continue;
      }
      if (starts_with("{#if")) {
        out.push_back(parse_if());
        continue;
      }
      if (starts_with("{#") || starts_with("{/") || starts_with("{:")) fail("unknown block");
      if (peek() == '{') {
        TemplateNode n = make(line_, col_);
        advance();
        skip_ws();
        StatePath p = parse_path();
        skip_ws();
        if (peek() != '}') fail("bad hole syntax, expected '}'");
        advance();
        n.node = HoleT{std::move(p)};
        out.push_back(std::move(n));
        continue;
      }
      TemplateNode n = make(line_, col_);
      std::size_t begin = pos_;
      while (!eof() && peek() != '<' && peek() != '{') advance();
      std::string_view text = src_.substr(begin, pos_ - begin);
      bool blank = true;
      for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
      if (!blank) {
        n.node = TextT{std::string(text)};
        out.push_back(std::move(n));
      }
    }
  }

  TemplateNode parse_each() {
    TemplateNode n = make(line_, col_);
    expect("{#each");
    EachT each;
    skip_ws();
    each.list_path = parse_path();
    skip_ws();
    expect("as");
    if (!std::isspace(static_cast<unsigned char>(peek()))) fail("expected whitespace after 'as'");
    skip_ws();
    each.item_name = parse_ident();
    skip_ws();
    if (!starts_with("key=")) fail("each block requires key=<path>");
    advance(4);
    StatePath key = parse_path();
    if (key.segments.front() != each.item_name) fail("each key must be a path on '" + each.item_name + "'");
    each.key_path.segments.assign(key.segments.begin() + 1, key.segments.end());
    skip_ws();
    expect("}");
    if (parse_content(each.body) != End::EndEach) fail("expected {/each}");
    if (each.body.size() != 1 || !std::holds_alternative<ElementT>(each.body.front().node)) {
      throw ParseError("each body must be a single element", n.line, n.column);
    }
    for (const auto& a : std::get<ElementT>(each.body.front().node).static_attrs) {
      if (a.first == "key") throw ParseError("each body root takes its key from the block", n.line, n.column);
    }
    for (const auto& a : std::get<ElementT>(each.body.front().node).dynamic_attrs) {
      if (a.first == "key") throw ParseError("each body root takes its key from the block", n.line, n.column);
    }
    n.node = std::move(each);
    return n;
  }

  TemplateNode parse_if() {
    TemplateNode n = make(line_, col_);
    expect("{#if");
    IfT branch;
    skip_ws();
    branch.cond_path = parse_path();
    skip_ws();
    expect("}");
    End end = parse_content(branch.then_body);
    if (end == End::Else) end = parse_content(branch.else_body);
    if (end != End::EndIf) fail("expected {/if}");
    n.node = std::move(branch);
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace detail

// Grammar:
//   element    = "<" tag attr* ">" content "</" tag ">" | "<" tag attr* "/>"
//   attr       = name "=" ( quoted-literal | "{" path "}" )
//   content    = ( element | text | "{" path "}" | each-block | if-block )*
//   each-block = "{#each" path "as" ident "key=" path "}" content "{/each}"
//   if-block   = "{#if" path "}" content [ "{:else}" content ] "{/if}"
// Whitespace-only text is dropped; other text is kept verbatim.
inline TemplateAst parse(std::string_view source) {
  TemplateAst ast;
  ast.root = detail::TemplateParser(source).parse_document();
  ast.source_hash = source_hash(source);
  return ast;
}

// Marks every node static iff its subtree has no hole, dynamic attribute,
// each block or if block.
inline bool analyze(TemplateNode& node) {
  struct Visitor {
    bool operator()(ElementT& el) const {
      bool all = el.dynamic_attrs.empty();
      for (TemplateNode& c : el.children) all = analyze(c) && all;
      return all;
    }
    bool operator()(TextT&) const { return true; }
    bool operator()(HoleT&) const { return false; }
    bool operator()(EachT& each) const {
      for (TemplateNode& c : each.body) analyze(c);
      return false;
    }
    bool operator()(IfT& branch) const {
      for (TemplateNode& c : branch.then_body) analyze(c);
      for (TemplateNode& c : branch.else_body) analyze(c);
      return false;
    }
  };
  node.is_static = std::visit(Visitor{}, node.node);
  return node.is_static;
}

inline TemplateAst& analyze(TemplateAst& ast) {
  analyze(ast.root);
  return ast;
}

}  // namespace vdomc
