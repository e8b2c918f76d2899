#pragma once

#include <string>

#include "loopybp/factor_graph.hpp"

namespace loopybp {

/// Serializes a graph to the FACTORGRAPH 1 text format. Table entries are
/// printed with 17 significant digits so a round trip is loss-free.
///
/// Format (line oriented, `#` starts a comment, blank lines ignored):
///   FACTORGRAPH 1
///   <V>
///   <cardinality_0> ... <cardinality_{V-1}>
///   <F>
///   then per factor two lines:
///     <scope size> <variable ids...>
///     <flattened table, row-major, last scope variable fastest>
std::string save_model(const FactorGraph& g);

/// Parses the text format above. Throws ParseError (with a line number) on
/// malformed input and NonPositiveEntry on tables violating positivity.
FactorGraph load_model(const std::string& text);

void save_model_file(const FactorGraph& g, const std::string& path);
FactorGraph load_model_file(const std::string& path);

}  // namespace loopybp
