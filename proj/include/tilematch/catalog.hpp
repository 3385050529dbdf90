#pragma once

// Layout selectors shared by the command line and the service:
//   rect<R>x<C>      R rows of C tiles (Shisen-Sho grid); rect1x8 is one row
//   foo, bar         the built-in three-level Mahjong layouts
//   default, turtle  <data dir>/default.layout
//   <name>           <data dir>/<name>.layout when it exists
//   anything else    a layout file path
// The data directory comes from TILEMATCH_DATA_DIR, then the build default.

#include <cstdlib>
#include <filesystem>
#include <regex>
#include <stdexcept>
#include <string>

#include "layout.hpp"

#ifndef TILEMATCH_DEFAULT_DATA_DIR
#define TILEMATCH_DEFAULT_DATA_DIR "data"
#endif

namespace tilematch {

inline std::string data_dir() {
  if (const char* env = std::getenv("TILEMATCH_DATA_DIR"); env && *env) return env;
  return TILEMATCH_DEFAULT_DATA_DIR;
}

// Throws std::invalid_argument for unknown selectors and LayoutError for
// files that fail to parse or validate.
inline Layout resolve_layout(const std::string& selector, const std::string& dir = data_dir()) {
  namespace fs = std::filesystem;
  static const std::regex rect(R"(rect(\d+)x(\d+))");
  std::smatch m;
  if (std::regex_match(selector, m, rect)) return make_rectangle(std::stoi(m[2]), std::stoi(m[1]));
  if (selector == "foo") return make_foo();
  if (selector == "bar") return make_bar();
  const std::string stem = selector == "turtle" ? "default" : selector;
  const fs::path named = fs::path(dir) / (stem + ".layout");
  Layout l;
  if (selector.find('/') == std::string::npos && fs::exists(named)) {
    l = load_layout_file(named.string());
    l.name = selector;
  } else if (fs::exists(selector)) {
    l = load_layout_file(selector);
  } else {
    throw std::invalid_argument("unknown layout '" + selector + "' (looked in " + dir + ")");
  }
  validate(l);
  return l;
}

}  // namespace tilematch
