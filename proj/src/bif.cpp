#include "bif.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "dgp.hpp"
#include "errors.hpp"

namespace spc {

namespace {

constexpr double kRowSumTolerance = 1e-6;

bool is_punct(char c) {
  switch (c) {
    case '(': case ')': case '{': case '}': case '[': case ']': case ',': case ';': case '|':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

struct Token {
  enum Kind { kWord, kPunct, kEnd } kind = kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = text_[pos_];
      if (is_punct(c)) {
        t.kind = Token::kPunct;
        t.text = std::string(1, c);
        advance();
      } else if (c == '"') {
        t.kind = Token::kWord;
        advance();
        while (pos_ < text_.size() && text_[pos_] != '"') {
          t.text.push_back(text_[pos_]);
          advance();
        }
        if (pos_ >= text_.size()) throw ParseError("unterminated string", t.line, t.column);
        advance();
      } else {
        t.kind = Token::kWord;
        while (pos_ < text_.size() && !is_space(text_[pos_]) && !is_punct(text_[pos_]) &&
               text_[pos_] != '"' && !at_comment()) {
          t.text.push_back(text_[pos_]);
          advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool at_comment() const {
    return pos_ + 1 < text_.size() && text_[pos_] == '/' && (text_[pos_ + 1] == '/' || text_[pos_ + 1] == '*');
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    for (;;) {
      while (pos_ < text_.size() && is_space(text_[pos_])) advance();
      if (!at_comment()) return;
      const int line = line_;
      const int column = column_;
      if (text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        advance();
        advance();
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= text_.size()) throw ParseError("unterminated comment", line, column);
        advance();
        advance();
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

struct RawEntry {
  enum Kind { kTable, kDefault, kCombo } kind = kTable;
  std::vector<std::string> states;
  std::vector<double> values;
  Token at;
};

struct RawProbability {
  std::string child;
  std::vector<std::string> parents;
  std::vector<RawEntry> entries;
  Token at;
};

struct RawVariable {
  DiscreteVariable var;
  Token at;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  DiscreteBayesNet run() {
    while (peek().kind != Token::kEnd) {
      const Token t = expect_word();
      if (t.text == "network") {
        parse_network();
      } else if (t.text == "variable") {
        parse_variable(t);
      } else if (t.text == "probability") {
        parse_probability(t);
      } else {
        fail("unknown block '" + t.text + "'", t);
      }
    }
    return resolve();
  }

 private:
  [[noreturn]] static void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.column);
  }

  [[noreturn]] static void semantic(const std::string& msg, const Token& at) {
    throw Error(ErrorCode::kSemantic,
                "line " + std::to_string(at.line) + ", column " + std::to_string(at.column) + ": " + msg);
  }

  const Token& peek() const { return tokens_[pos_]; }
  Token next() {
    Token t = tokens_[pos_];
    if (t.kind != Token::kEnd) ++pos_;
    return t;
  }
  bool peek_punct(char c) const { return peek().kind == Token::kPunct && peek().text[0] == c; }

  Token expect_word() {
    Token t = next();
    if (t.kind != Token::kWord) fail("expected a word, found " + describe(t), t);
    return t;
  }

  void expect_punct(char c) {
    Token t = next();
    if (t.kind != Token::kPunct || t.text[0] != c) {
      fail(std::string("expected '") + c + "', found " + describe(t), t);
    }
  }

  static std::string describe(const Token& t) {
    if (t.kind == Token::kEnd) return "end of input";
    return "'" + t.text + "'";
  }

  double expect_number() {
    Token t = expect_word();
    const char* begin = t.text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) fail("invalid number '" + t.text + "'", t);
    return v;
  }

  // `property` entries carry free text up to the terminating semicolon.
  void skip_property() {
    while (!peek_punct(';')) {
      if (peek().kind == Token::kEnd) fail("unterminated property", peek());
      next();
    }
    next();
  }

  void parse_network() {
    if (!peek_punct('{')) name_ = expect_word().text;
    expect_punct('{');
    while (!peek_punct('}')) {
      Token t = expect_word();
      if (t.text != "property") fail("unexpected '" + t.text + "' in network block", t);
      skip_property();
    }
    expect_punct('}');
  }

  void parse_variable(const Token& at) {
    RawVariable raw;
    raw.at = at;
    raw.var.name = expect_word().text;
    expect_punct('{');
    bool typed = false;
    while (!peek_punct('}')) {
      Token t = expect_word();
      if (t.text == "property") {
        skip_property();
        continue;
      }
      if (t.text != "type") fail("unexpected '" + t.text + "' in variable block", t);
      Token kind = expect_word();
      if (kind.text != "discrete") fail("unsupported variable type '" + kind.text + "'", kind);
      expect_punct('[');
      Token count = expect_word();
      char* end = nullptr;
      const long k = std::strtol(count.text.c_str(), &end, 10);
      if (*end != '\0' || k < 1) fail("invalid state count '" + count.text + "'", count);
      expect_punct(']');
      expect_punct('{');
      for (;;) {
        raw.var.states.push_back(expect_word().text);
        if (peek_punct(',')) {
          next();
          continue;
        }
        break;
      }
      expect_punct('}');
      expect_punct(';');
      if (static_cast<long>(raw.var.states.size()) != k) {
        semantic("variable '" + raw.var.name + "' declares " + std::to_string(k) + " states but lists " +
                     std::to_string(raw.var.states.size()),
                 count);
      }
      std::vector<std::string> sorted = raw.var.states;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        semantic("variable '" + raw.var.name + "' repeats a state label", count);
      }
      typed = true;
    }
    expect_punct('}');
    if (!typed) semantic("variable '" + raw.var.name + "' has no type", at);
    variables_.push_back(std::move(raw));
  }

  std::vector<double> parse_numbers() {
    std::vector<double> values;
    for (;;) {
      values.push_back(expect_number());
      if (peek_punct(',')) {
        next();
        continue;
      }
      break;
    }
    expect_punct(';');
    return values;
  }

  void parse_probability(const Token& at) {
    RawProbability raw;
    raw.at = at;
    expect_punct('(');
    raw.child = expect_word().text;
    if (peek_punct('|')) {
      next();
      for (;;) {
        raw.parents.push_back(expect_word().text);
        if (peek_punct(',')) {
          next();
          continue;
        }
        break;
      }
    }
    expect_punct(')');
    expect_punct('{');
    while (!peek_punct('}')) {
      RawEntry entry;
      entry.at = peek();
      if (peek_punct('(')) {
        next();
        entry.kind = RawEntry::kCombo;
        for (;;) {
          entry.states.push_back(expect_word().text);
          if (peek_punct(',')) {
            next();
            continue;
          }
          break;
        }
        expect_punct(')');
      } else {
        Token t = expect_word();
        if (t.text == "property") {
          skip_property();
          continue;
        }
        if (t.text == "table") {
          entry.kind = RawEntry::kTable;
        } else if (t.text == "default") {
          entry.kind = RawEntry::kDefault;
        } else {
          fail("unexpected '" + t.text + "' in probability block", t);
        }
      }
      entry.values = parse_numbers();
      raw.entries.push_back(std::move(entry));
    }
    expect_punct('}');
    probabilities_.push_back(std::move(raw));
  }

  DiscreteBayesNet resolve() {
    DiscreteBayesNet net;
    net.name = name_;
    std::map<std::string, Node, std::less<>> index;
    for (const auto& raw : variables_) {
      if (!index.emplace(raw.var.name, net.variables.size()).second) {
        semantic("duplicate variable '" + raw.var.name + "'", raw.at);
      }
      net.variables.push_back(raw.var);
    }
    const std::size_t n = net.variables.size();
    net.parents.assign(n, {});
    net.cpts.assign(n, {});
    std::vector<bool> seen(n, false);

    auto lookup = [&](const std::string& name, const Token& at) {
      auto it = index.find(name);
      if (it == index.end()) semantic("unknown variable '" + name + "'", at);
      return it->second;
    };

    for (const auto& raw : probabilities_) {
      const Node child = lookup(raw.child, raw.at);
      if (seen[child]) semantic("second probability block for '" + raw.child + "'", raw.at);
      seen[child] = true;
      std::vector<Node> parents;
      for (const auto& p : raw.parents) {
        const Node v = lookup(p, raw.at);
        if (v == child) semantic("'" + raw.child + "' lists itself as a parent", raw.at);
        if (std::find(parents.begin(), parents.end(), v) != parents.end()) {
          semantic("parent '" + p + "' repeated for '" + raw.child + "'", raw.at);
        }
        parents.push_back(v);
      }
      net.parents[child] = parents;
      fill_cpt(net, child, raw);
    }
    for (Node v = 0; v < n; ++v) {
      if (!seen[v]) {
        semantic("no probability block for '" + net.variables[v].name + "'", variables_[v].at);
      }
    }
    try {
      (void)net.graph();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kCycle) throw Error(ErrorCode::kSemantic, "network structure is cyclic");
      throw;
    }
    return net;
  }

  static void fill_cpt(DiscreteBayesNet& net, Node child, const RawProbability& raw) {
    const std::size_t k = net.variables[child].states.size();
    const std::size_t combos = net.num_combinations(child);
    const auto& parents = net.parents[child];
    std::vector<double>& cpt = net.cpts[child];
    cpt.assign(combos * k, 0.0);
    std::vector<bool> filled(combos, false);
    const RawEntry* fallback = nullptr;

    for (const auto& e : raw.entries) {
      switch (e.kind) {
        case RawEntry::kTable: {
          if (e.values.size() != combos * k) {
            semantic("table for '" + raw.child + "' has " + std::to_string(e.values.size()) +
                         " entries, expected " + std::to_string(combos * k),
                     e.at);
          }
          // Child state varies slowest in a table over a parented node.
          for (std::size_t s = 0; s < k; ++s) {
            for (std::size_t c = 0; c < combos; ++c) cpt[c * k + s] = e.values[s * combos + c];
          }
          std::fill(filled.begin(), filled.end(), true);
          break;
        }
        case RawEntry::kDefault:
          if (e.values.size() != k) semantic("default row for '" + raw.child + "' has the wrong length", e.at);
          fallback = &e;
          break;
        case RawEntry::kCombo: {
          if (e.states.size() != parents.size()) {
            semantic("row for '" + raw.child + "' names " + std::to_string(e.states.size()) +
                         " parent states, expected " + std::to_string(parents.size()),
                     e.at);
          }
          if (e.values.size() != k) semantic("row for '" + raw.child + "' has the wrong length", e.at);
          std::size_t combo = 0;
          for (std::size_t q = 0; q < parents.size(); ++q) {
            const auto& states = net.variables[parents[q]].states;
            auto it = std::find(states.begin(), states.end(), e.states[q]);
            if (it == states.end()) {
              semantic("unknown state '" + e.states[q] + "' of '" + net.variables[parents[q]].name + "'", e.at);
            }
            combo = combo * states.size() + static_cast<std::size_t>(it - states.begin());
          }
          if (filled[combo]) semantic("repeated row for '" + raw.child + "'", e.at);
          std::copy(e.values.begin(), e.values.end(), cpt.begin() + static_cast<std::ptrdiff_t>(combo * k));
          filled[combo] = true;
          break;
        }
      }
    }
    for (std::size_t c = 0; c < combos; ++c) {
      if (filled[c]) continue;
      if (fallback == nullptr) {
        throw ParseError("probability block for '" + raw.child + "' leaves a parent combination unspecified",
                         raw.at.line, raw.at.column);
      }
      std::copy(fallback->values.begin(), fallback->values.end(), cpt.begin() + static_cast<std::ptrdiff_t>(c * k));
    }
    for (std::size_t c = 0; c < combos; ++c) {
      double sum = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double p = cpt[c * k + s];
        if (p < 0.0) semantic("negative probability for '" + raw.child + "'", raw.at);
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", sum);
        semantic("a row of '" + raw.child + "' sums to " + buf, raw.at);
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string name_ = "unknown";
  std::vector<RawVariable> variables_;
  std::vector<RawProbability> probabilities_;
};

std::string quoted(const std::string& word) {
  const bool plain = !word.empty() && std::none_of(word.begin(), word.end(), [](char c) {
    return is_space(c) || is_punct(c) || c == '"';
  }) && word.find("//") == std::string::npos && word.find("/*") == std::string::npos;
  return plain ? word : "\"" + word + "\"";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::size_t DiscreteBayesNet::num_combinations(Node v) const {
  std::size_t combos = 1;
  for (Node p : parents.at(v)) combos *= variables[p].states.size();
  return combos;
}

Node DiscreteBayesNet::index_of(std::string_view wanted) const {
  for (Node v = 0; v < variables.size(); ++v) {
    if (variables[v].name == wanted) return v;
  }
  throw Error(ErrorCode::kSemantic, "unknown variable '" + std::string(wanted) + "'");
}

Dag DiscreteBayesNet::graph() const {
  std::vector<std::pair<Node, Node>> edges;
  for (Node v = 0; v < parents.size(); ++v) {
    for (Node p : parents[v]) edges.emplace_back(p, v);
  }
  return build_dag(variables.size(), edges);
}

DiscreteBayesNet parse_bif(std::string_view text) { return Parser(Lexer(text).run()).run(); }

DiscreteBayesNet load_bif(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bif(buf.str());
}

std::string to_bif(const DiscreteBayesNet& net) {
  std::ostringstream out;
  out << "network " << quoted(net.name.empty() ? "unknown" : net.name) << " {\n}\n";
  for (const auto& v : net.variables) {
    out << "variable " << quoted(v.name) << " {\n  type discrete [ " << v.states.size() << " ] { ";
    for (std::size_t s = 0; s < v.states.size(); ++s) out << (s ? ", " : "") << quoted(v.states[s]);
    out << " };\n}\n";
  }
  for (Node v = 0; v < net.num_variables(); ++v) {
    const auto& parents = net.parents[v];
    const std::size_t k = net.variables[v].states.size();
    out << "probability ( " << quoted(net.variables[v].name);
    for (std::size_t q = 0; q < parents.size(); ++q) {
      out << (q ? ", " : " | ") << quoted(net.variables[parents[q]].name);
    }
    out << " ) {\n";
    const std::size_t combos = net.num_combinations(v);
    for (std::size_t c = 0; c < combos; ++c) {
      if (parents.empty()) {
        out << "  table ";
      } else {
        std::vector<std::size_t> digits(parents.size());
        std::size_t rest = c;
        for (std::size_t q = parents.size(); q-- > 0;) {
          const std::size_t card = net.variables[parents[q]].states.size();
          digits[q] = rest % card;
          rest /= card;
        }
        out << "  (";
        for (std::size_t q = 0; q < parents.size(); ++q) {
          out << (q ? ", " : "") << quoted(net.variables[parents[q]].states[digits[q]]);
        }
        out << ") ";
      }
      for (std::size_t s = 0; s < k; ++s) out << (s ? ", " : "") << number(net.cpts[v][c * k + s]);
      out << ";\n";
    }
    out << "}\n";
  }
  return out.str();
}

DiscreteDataset sample_bn(const DiscreteBayesNet& net, std::size_t num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  const std::size_t d = net.num_variables();
  const std::vector<Node> order = topological_order(net.graph());
  DiscreteDataset out;
  out.seed = seed;
  out.codes.resize(static_cast<Eigen::Index>(num_samples), static_cast<Eigen::Index>(d));
  for (const auto& v : net.variables) {
    out.names.push_back(v.name);
    out.states.push_back(v.states);
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 0; r < num_samples; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (Node v : order) {
      std::size_t combo = 0;
      for (Node p : net.parents[v]) {
        combo = combo * net.variables[p].states.size() + static_cast<std::size_t>(out.codes(row, static_cast<Eigen::Index>(p)));
      }
      const std::size_t k = net.variables[v].states.size();
      const double* probs = net.cpts[v].data() + combo * k;
      const double total = std::accumulate(probs, probs + k, 0.0);
      const double u = unit(rng) * total;
      double cum = 0.0;
      std::size_t pick = k;
      for (std::size_t s = 0; s < k; ++s) {
        cum += probs[s];
        if (cum > u) {
          pick = s;
          break;
        }
      }
      if (pick == k) {
        // Rounding left u at the very top; take the last state with mass.
        for (std::size_t s = k; s-- > 0;) {
          if (probs[s] > 0.0) {
            pick = s;
            break;
          }
        }
      }
      out.codes(row, static_cast<Eigen::Index>(v)) = static_cast<int>(pick);
    }
  }
  return out;
}

Dataset encode_standardize(const DiscreteDataset& data) {
  const Eigen::Index n = data.codes.rows();
  const Eigen::Index d = data.codes.cols();
  Dataset ds;
  ds.names = data.names;
  ds.seed = data.seed;
  ds.values.resize(n, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto& labels = data.states[static_cast<std::size_t>(c)];
    std::vector<std::size_t> by_label(labels.size());
    std::iota(by_label.begin(), by_label.end(), 0);
    std::sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    std::vector<double> rank(labels.size());
    for (std::size_t r = 0; r < by_label.size(); ++r) rank[by_label[r]] = static_cast<double>(r);
    bool varied = false;
    for (Eigen::Index r = 0; r < n; ++r) {
      const int code = data.codes(r, c);
      if (code < 0 || static_cast<std::size_t>(code) >= labels.size()) {
        throw Error(ErrorCode::kIndex, "state index out of range in column " + std::to_string(c));
      }
      ds.values(r, c) = rank[static_cast<std::size_t>(code)];
      varied = varied || code != data.codes(0, c);
    }
    if (!varied) {
      const std::string name = static_cast<std::size_t>(c) < data.names.size() ? data.names[static_cast<std::size_t>(c)]
                                                                               : std::to_string(c);
      throw Error(ErrorCode::kDegenerateColumn, "column '" + name + "' has a single observed state");
    }
  }
  return standardize(ds);
}

void save_discrete_csv(const std::string& path, const DiscreteDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (std::size_t c = 0; c < data.names.size(); ++c) out << (c ? "," : "") << data.names[c];
  out << '\n';
  for (Eigen::Index r = 0; r < data.codes.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.codes.cols(); ++c) out << (c ? "," : "") << data.codes(r, c);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace spc
