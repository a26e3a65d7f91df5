#pragma once

#include <map>
#include <string>
#include <string_view>

namespace llcoach {

/// Fills `[PLACEHOLDER]` slots (upper-case identifiers in square brackets).
///
/// Substituted values are inserted verbatim and never re-scanned, so values
/// may themselves contain bracketed text. A template line whose slots all
/// render empty is dropped. Any slot without a value throws
/// UnresolvedPlaceholder.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values);

/// A template file split into its `[SYSTEM]` and `[USER]` sections.
struct PromptTemplate {
  std::string system;
  std::string user;

  static PromptTemplate parse(std::string_view text);
};

}  // namespace llcoach
