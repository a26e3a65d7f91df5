#include "llcoach/prompt.hpp"

#include <cctype>

#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

// Length of a `[NAME]` slot starting at `pos`, or 0.
std::size_t slot_length(std::string_view s, std::size_t pos) {
  if (s[pos] != '[' || pos + 2 >= s.size()) return 0;
  std::size_t i = pos + 1;
  if (!(s[i] >= 'A' && s[i] <= 'Z')) return 0;
  while (i < s.size() && ((s[i] >= 'A' && s[i] <= 'Z') || (s[i] >= '0' && s[i] <= '9') || s[i] == '_')) {
    ++i;
  }
  return i < s.size() && s[i] == ']' ? i - pos + 1 : 0;
}

}  // namespace

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  const auto lines = text::split_lines(tmpl);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    std::string rendered;
    bool had_slot = false;
    bool any_nonempty_slot = false;
    for (std::size_t i = 0; i < line.size();) {
      const std::size_t len = slot_length(line, i);
      if (len == 0) {
        rendered.push_back(line[i++]);
        continue;
      }
      const std::string_view name = std::string_view(line).substr(i + 1, len - 2);
      auto it = values.find(name);
      if (it == values.end()) {
        throw Error(ErrorKind::UnresolvedPlaceholder,
                    "no value for [" + std::string(name) + "] on template line " + std::to_string(li + 1));
      }
      had_slot = true;
      any_nonempty_slot = any_nonempty_slot || !it->second.empty();
      rendered += it->second;
      i += len;
    }
    if (had_slot && !any_nonempty_slot) continue;
    out += rendered;
    out += "\n";
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

PromptTemplate PromptTemplate::parse(std::string_view input) {
  PromptTemplate t;
  std::string* target = nullptr;
  for (const auto& line : text::split_lines(input)) {
    const auto trimmed = text::trim(line);
    if (trimmed == "[SYSTEM]") {
      target = &t.system;
      continue;
    }
    if (trimmed == "[USER]") {
      target = &t.user;
      continue;
    }
    if (target == nullptr) {
      if (trimmed.empty()) continue;
      throw Error(ErrorKind::ParseError, "prompt template text before [SYSTEM]/[USER] section");
    }
    *target += line + "\n";
  }
  if (text::trim(t.user).empty()) throw Error(ErrorKind::ParseError, "prompt template has no [USER] section");
  return t;
}

}  // namespace llcoach
