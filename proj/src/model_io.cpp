#include "loopybp/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace loopybp {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Line-oriented tokenizer that strips comments and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  int line_number() const { return line_; }

  /// Next non-empty line with comments removed; false at end of input.
  bool next_line(std::string& out) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const auto first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = raw.find_last_not_of(" \t\r");
      out = raw.substr(first, last - first + 1);
      return true;
    }
    return false;
  }

 private:
  std::istringstream in_;
  int line_ = 0;
};

long parse_long(const std::string& tok, int line, const char* what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  return v;
}

double parse_double(const std::string& tok, int line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(line, "expected a number, got '" + tok + "'");
  return v;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

std::string save_model(const FactorGraph& g) {
  std::ostringstream out;
  out << "FACTORGRAPH 1\n";
  out << g.num_variables() << "\n";
  for (std::int32_t i = 0; i < g.num_variables(); ++i) {
    if (i) out << ' ';
    out << g.cardinality(i);
  }
  out << "\n" << g.num_factors() << "\n";
  for (std::int32_t a = 0; a < g.num_factors(); ++a) {
    const Factor& f = g.factor(a);
    out << f.scope.size();
    for (std::int32_t j : f.scope) out << ' ' << j;
    out << "\n";
    for (std::size_t k = 0; k < f.table.size(); ++k) {
      if (k) out << ' ';
      out << format_double(f.table[k]);
    }
    out << "\n";
  }
  return out.str();
}

FactorGraph load_model(const std::string& text) {
  LineReader reader(text);
  std::string line;

  if (!reader.next_line(line)) throw ParseError(reader.line_number(), "empty model file");
  if (line != "FACTORGRAPH 1")
    throw ParseError(reader.line_number(), "expected header 'FACTORGRAPH 1', got '" + line + "'");

  if (!reader.next_line(line)) throw ParseError(reader.line_number(), "missing variable count");
  const long nv = parse_long(line, reader.line_number(), "the variable count");
  if (nv < 0) throw ParseError(reader.line_number(), "negative variable count");

  if (!reader.next_line(line)) throw ParseError(reader.line_number(), "missing cardinalities");
  auto card_toks = split_tokens(line);
  if (static_cast<long>(card_toks.size()) != nv)
    throw ParseError(reader.line_number(),
                     "expected " + std::to_string(nv) + " cardinalities, got " +
                         std::to_string(card_toks.size()));
  std::vector<VariableSpec> vars(nv);
  for (long i = 0; i < nv; ++i) {
    const long c = parse_long(card_toks[i], reader.line_number(), "a cardinality");
    if (c < 1) throw ParseError(reader.line_number(), "cardinality must be >= 1");
    vars[i] = {static_cast<std::int32_t>(i), static_cast<std::int32_t>(c)};
  }

  if (!reader.next_line(line)) throw ParseError(reader.line_number(), "missing factor count");
  const long nf = parse_long(line, reader.line_number(), "the factor count");
  if (nf < 0) throw ParseError(reader.line_number(), "negative factor count");

  std::vector<Factor> factors;
  factors.reserve(nf);
  for (long a = 0; a < nf; ++a) {
    if (!reader.next_line(line))
      throw ParseError(reader.line_number(),
                       "declared " + std::to_string(nf) + " factors but input ends after " +
                           std::to_string(a));
    auto toks = split_tokens(line);
    const long arity = parse_long(toks[0], reader.line_number(), "a scope size");
    if (arity < 0 || static_cast<long>(toks.size()) != arity + 1)
      throw ParseError(reader.line_number(),
                       "scope line declares " + std::to_string(arity) + " variables but lists " +
                           std::to_string(toks.size() - 1));
    Factor f;
    f.id = static_cast<std::int32_t>(a);
    std::int64_t size = 1;
    for (long p = 0; p < arity; ++p) {
      const long j = parse_long(toks[p + 1], reader.line_number(), "a variable id");
      if (j < 0 || j >= nv)
        throw ParseError(reader.line_number(), "variable id " + std::to_string(j) +
                                                   " out of range [0, " + std::to_string(nv) + ")");
      f.scope.push_back(static_cast<std::int32_t>(j));
      size *= vars[j].cardinality;
    }
    if (!reader.next_line(line))
      throw ParseError(reader.line_number(), "missing table for factor " + std::to_string(a));
    auto entries = split_tokens(line);
    if (static_cast<std::int64_t>(entries.size()) != size)
      throw ParseError(reader.line_number(),
                       "factor " + std::to_string(a) + " needs " + std::to_string(size) +
                           " table entries, got " + std::to_string(entries.size()));
    f.table.reserve(entries.size());
    for (const auto& tok : entries) f.table.push_back(parse_double(tok, reader.line_number()));
    factors.push_back(std::move(f));
  }

  if (reader.next_line(line))
    throw ParseError(reader.line_number(),
                     "trailing content after the declared " + std::to_string(nf) + " factors");

  return FactorGraph(std::move(vars), std::move(factors));
}

void save_model_file(const FactorGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << save_model(g);
  if (!out) throw Error("failed writing '" + path + "'");
}

FactorGraph load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace loopybp
