#pragma once

#include <string>
#include <vector>

#include "mlab/system.h"

namespace mlab {

/// A catalog row: the descriptor plus display/test metadata. The metadata
/// (formula strings, expected critical values) is informational only and is
/// never consumed by the algorithms.
struct CatalogEntry {
    SystemDescriptor system;
    std::string f1_formula;  ///< config-syntax formula ("" for extended entries)
    std::string f2_formula;
    std::string summary;
    std::vector<ValuePoint> expected_critical_values;
    bool extended = false;
};

/// Names of all builtin systems, in catalog order.
std::vector<std::string> builtin_names();

/// Looks up a builtin by name. Throws LookupError for unknown names.
const CatalogEntry& catalog_entry(const std::string& name);
SystemDescriptor builtin_system(const std::string& name);

/// Parses a system definition document (the [system] key=value format,
/// grammar documented in the README). Gradients of the parsed components
/// are produced by symbolic differentiation of the expression trees.
/// Throws ParseError with 1-based line/column positions.
SystemDescriptor parse_system(const std::string& text);

}  // namespace mlab
