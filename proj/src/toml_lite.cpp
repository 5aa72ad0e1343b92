#include "ptune/toml_lite.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace ptune::toml_lite {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("toml line " + std::to_string(line) + ": " + what);
}

json parse_scalar(const std::string& tok, int line) {
  if (tok.empty()) fail(line, "empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) {
        ++i;
        switch (tok[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(line, "unsupported escape");
        }
      } else {
        out += tok[i];
      }
    }
    return out;
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  // number: integer unless it carries a dot or exponent
  try {
    size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos) {
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) fail(line, "bad integer '" + tok + "'");
      return v;
    }
    const double v = std::stod(tok, &used);
    if (used != tok.size()) fail(line, "bad number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "unrecognized value '" + tok + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range '" + tok + "'");
  }
}

// Splits an array body on top-level commas (strings may contain commas).
json parse_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array");
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::string tok;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!trim(tok).empty()) arr.push_back(parse_scalar(trim(tok), line));
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (!trim(tok).empty()) arr.push_back(parse_scalar(trim(tok), line));
    return arr;
  }
  return parse_scalar(v, line);
}

std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace

nlohmann::json parse(const std::string& text) {
  json root = json::object();
  json* section = &root;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool array_of_tables = line.size() >= 4 && line[1] == '[';
      const std::string closer = array_of_tables ? "]]" : "]";
      if (line.substr(line.size() - closer.size()) != closer)
        fail(line_no, "unterminated section header");
      const size_t open = array_of_tables ? 2 : 1;
      const std::string name = trim(line.substr(open, line.size() - 2 * open));
      if (name.empty()) fail(line_no, "empty section name");
      section = &root;
      std::vector<std::string> parts;
      {
        std::istringstream ps(name);
        std::string part;
        while (std::getline(ps, part, '.')) {
          part = trim(part);
          if (part.empty()) fail(line_no, "empty section component");
          parts.push_back(part);
        }
      }
      for (size_t i = 0; i < parts.size(); ++i) {
        const bool last = (i + 1 == parts.size());
        json& slot = (*section)[parts[i]];
        if (last && array_of_tables) {
          if (slot.is_null()) slot = json::array();
          if (!slot.is_array()) fail(line_no, "table array redefines a value");
          slot.push_back(json::object());
          section = &slot.back();
        } else {
          if (slot.is_null()) slot = json::object();
          if (slot.is_array()) {
            if (slot.empty()) fail(line_no, "cannot descend into empty table array");
            section = &slot.back();
          } else if (slot.is_object()) {
            section = &slot;
          } else {
            fail(line_no, "section redefines a value");
          }
        }
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    (*section)[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

}  // namespace ptune::toml_lite
