#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include "desopacity/error.hpp"
#include "json.hpp"

namespace desopacity {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Parses JSON, translating the byte offset of a syntax error into a line.
inline json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(msg, line);
  }
}

}  // namespace desopacity
