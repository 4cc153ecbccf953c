#include "ttx/toolkit/toolkit.hpp"

#include "ttx/common/pattern.hpp"

namespace ttx::toolkit {

using definition::EffectKind;
using definition::ToolSpec;

Classification ClassifyArguments(const ToolSpec& tool, const Arguments& args) {
  for (const auto& arg : tool.arguments) {
    const auto it = args.find(arg.name);
    if (it == args.end()) {
      if (arg.required) return Classification::Incorrect(arg.name + ": missing");
      continue;
    }
    if (it->second.empty()) {
      if (arg.required) return Classification::Incorrect(arg.name + ": empty");
      continue;
    }
    if (!PatternMatches(arg.pattern, it->second)) {
      return Classification::Incorrect(arg.name + ": pattern mismatch");
    }
  }
  for (const auto& [name, value] : args) {
    if (tool.FindArgument(name) == nullptr) {
      return Classification::Incorrect(name + ": undeclared argument");
    }
  }
  return Classification::Correct();
}

std::vector<std::string> TemplatePlaceholders(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const std::size_t close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    names.emplace_back(text.substr(pos + 2, close - pos - 2));
    pos = close + 2;
  }
  return names;
}

std::string RenderTemplate(std::string_view text, const Arguments& args, std::string_view result) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    const std::size_t close =
        open == std::string_view::npos ? open : text.find("}}", open + 2);
    if (open == std::string_view::npos || close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    if (name == kResultPlaceholder) {
      out.append(result);
    } else if (const auto it = args.find(name); it != args.end()) {
      out.append(it->second);
    }
    pos = close + 2;
  }
  return out;
}

ToolResult Invoke(const ToolSpec& tool, const Arguments& args,
                  std::span<const definition::Page> pages, ToolState& state) {
  ToolResult result;
  result.classification = ClassifyArguments(tool, args);
  if (!result.classification.correct) {
    result.output = "Error: " + result.classification.reason;
    return result;
  }

  const auto& effect = tool.effect;
  const auto arg_it = args.find(effect.argument);
  const std::string key = arg_it == args.end() ? std::string() : arg_it->second;
  std::string effect_text;
  switch (effect.kind) {
    case EffectKind::kNone:
      break;
    case EffectKind::kRecordBlock: {
      const bool inserted = state.blocked.emplace(tool.id, key).second;
      result.side_effect = SideEffect{SideEffectKind::kBlockedEndpoint, key, {}, true, !inserted};
      break;
    }
    case EffectKind::kReturnPage: {
      std::string_view wanted = key;
      if (!wanted.empty() && wanted.back() == '/') wanted.remove_suffix(1);
      const definition::Page* page = nullptr;
      for (const auto& candidate : pages) {
        std::string_view url = candidate.url;
        if (!url.empty() && url.back() == '/') url.remove_suffix(1);
        if (url == wanted) {
          page = &candidate;
          break;
        }
      }
      if (page != nullptr) {
        effect_text = page->body;
      } else {
        effect_text = effect.not_found.empty() ? "404 Not Found: " + key
                                               : RenderTemplate(effect.not_found, args);
      }
      result.side_effect =
          SideEffect{SideEffectKind::kPage, key, effect_text, page != nullptr, false};
      break;
    }
    case EffectKind::kReturnLookup: {
      bool found = false;
      for (const auto& [entry_key, entry_value] : effect.table) {
        if (entry_key == key) {
          effect_text = entry_value;
          found = true;
          break;
        }
      }
      if (!found) {
        effect_text = effect.not_found.empty() ? "no record found for " + key
                                               : RenderTemplate(effect.not_found, args);
      }
      result.side_effect = SideEffect{SideEffectKind::kLookup, key, effect_text, found, false};
      break;
    }
  }

  result.output = tool.response_template.empty()
                      ? effect_text
                      : RenderTemplate(tool.response_template, args, effect_text);
  if (result.side_effect && result.side_effect->already_applied) {
    result.output += "\nNote: " + key + " is already blocked.";
  }
  if (result.output.empty()) result.output = "OK";
  return result;
}

}  // namespace ttx::toolkit
