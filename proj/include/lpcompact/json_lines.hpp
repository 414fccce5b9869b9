#ifndef LPCOMPACT_JSON_LINES_HPP_
#define LPCOMPACT_JSON_LINES_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lpcompact {

/// Source line of every value in a JSON document, keyed by JSON pointer.
/// Only meaningful for text that already parsed successfully.
class JsonLineIndex {
 public:
  JsonLineIndex() = default;
  explicit JsonLineIndex(std::string_view text) { build(text); }

  /// Line of the value at `pointer`, or of its closest recorded ancestor.
  int line_of(std::string pointer) const {
    while (true) {
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      if (pointer.empty()) return 1;
      pointer.erase(pointer.rfind('/'));
    }
  }

  static std::string escape(std::string_view token) {
    std::string out;
    for (char c : token) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

 private:
  struct Frame {
    bool object;
    std::string key;
    std::size_t index = 0;
    bool expecting_key = true;
  };

  std::string path(const std::vector<Frame>& stack) const {
    std::string p;
    for (const auto& f : stack) p += "/" + (f.object ? escape(f.key) : std::to_string(f.index));
    return p;
  }

  void build(std::string_view s) {
    std::vector<Frame> stack;
    int line = 1;
    auto read_string = [&](std::size_t& i) {
      std::string out;
      for (++i; i < s.size() && s[i] != '"'; ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          ++i;
          out += s[i];
        } else {
          if (s[i] == '\n') ++line;
          out += s[i];
        }
      }
      return out;
    };
    auto value_start = [&]() {
      lines_.emplace(path(stack), line);
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (c == '\n') {
        ++line;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == ':') continue;
      if (c == ',') {
        if (!stack.empty()) {
          if (stack.back().object) stack.back().expecting_key = true;
          else ++stack.back().index;
        }
        continue;
      }
      if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
        continue;
      }
      if (c == '"' && !stack.empty() && stack.back().object && stack.back().expecting_key) {
        stack.back().key = read_string(i);
        stack.back().expecting_key = false;
        continue;
      }
      value_start();
      if (c == '{') stack.push_back({true, {}, 0, true});
      else if (c == '[') stack.push_back({false, {}, 0, false});
      else if (c == '"') read_string(i);
      else
        while (i + 1 < s.size() && s[i + 1] != ',' && s[i + 1] != '}' && s[i + 1] != ']' && s[i + 1] != '\n' &&
               s[i + 1] != ' ')
          ++i;
    }
  }

  std::map<std::string, int> lines_;
};

}  // namespace lpcompact

#endif  // LPCOMPACT_JSON_LINES_HPP_
