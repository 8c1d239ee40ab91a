#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "stablefield/error.hpp"

namespace stablefield::cli {
namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, const std::string& where) : text_(text), where_(where) {}

  Json parse() {
    Json value = parse_value();
    skip_space();
    if (pos_ != text_.size()) error("unexpected text after value: '" + std::string(text_.substr(pos_)) + "'");
    return value;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const { fail(ErrorCode::kConfig, where_ + ": " + msg); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Json parse_value() {
    skip_space();
    if (pos_ >= text_.size()) error("missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_word();
    error(std::string("unexpected character '") + c + "'");
  }

  Json parse_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: error(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) error("unterminated string");
    ++pos_;
    return out;
  }

  Json parse_array() {
    ++pos_;
    Json out = Json::array();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return out;
    }
    for (;;) {
      out.push_back(parse_value());
      skip_space();
      if (pos_ >= text_.size()) error("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {  // trailing comma
          ++pos_;
          return out;
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return out;
      }
      error("expected ',' or ']' in array");
    }
  }

  Json parse_number() {
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                                  text_[end] == '-' || text_[end] == '+' || text_[end] == '_')) {
      ++end;
    }
    std::string token(text_.substr(pos_, end - pos_));
    std::erase(token, '_');
    pos_ = end;
    const char* first = token.data() + (token.front() == '+' ? 1 : 0);
    const char* last = token.data() + token.size();
    if (token.find_first_of(".eE") == std::string::npos) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) error("invalid number '" + token + "'");
    return v;
  }

  Json parse_word() {
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_' ||
                                  text_[end] == '-')) {
      ++end;
    }
    const std::string word(text_.substr(pos_, end - pos_));
    pos_ = end;
    if (word == "true") return true;
    if (word == "false") return false;
    return word;  // bare words are strings
  }

  std::string_view text_;
  std::string where_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty() || !(std::isalpha(static_cast<unsigned char>(key[0])) || key[0] == '_')) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

int bracket_depth(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"' && (k == 0 || s[k - 1] != '\\')) quoted = !quoted;
    if (quoted) continue;
    if (s[k] == '[') ++depth;
    if (s[k] == ']') --depth;
  }
  return depth;
}

void emit_scalar(std::ostream& out, const Json& v) {
  if (v.is_string()) {
    out << '"';
    for (char c : v.get<std::string>()) {
      switch (c) {
        case '"': out << "\\\""; break;
        case '\\': out << "\\\\"; break;
        case '\n': out << "\\n"; break;
        case '\t': out << "\\t"; break;
        default: out << c;
      }
    }
    out << '"';
  } else if (v.is_boolean()) {
    out << (v.get<bool>() ? "true" : "false");
  } else if (v.is_number_integer()) {
    out << v.get<std::int64_t>();
  } else if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    out << s;
  } else if (v.is_array()) {
    out << '[';
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0) out << ", ";
      emit_scalar(out, v[k]);
    }
    out << ']';
  } else {
    fail(ErrorCode::kConfig, "tables cannot appear inside arrays");
  }
}

void emit_table(std::ostream& out, const Json& table, const std::string& path) {
  bool header = path.empty();
  for (const auto& [key, value] : table.items()) {
    if (value.is_object()) continue;
    if (!header) {
      out << "\n[" << path << "]\n";
      header = true;
    }
    out << key << " = ";
    emit_scalar(out, value);
    out << '\n';
  }
  for (const auto& [key, value] : table.items()) {
    if (!value.is_object()) continue;
    const std::string sub = path.empty() ? key : path + "." + key;
    if (value.empty()) out << "\n[" << sub << "]\n";
    emit_table(out, value, sub);
  }
}

}  // namespace

Json parse_config(std::string_view text, const std::string& source) {
  Json root = Json::object();
  Json* table = &root;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const int start_line = line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(start_line);

    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::kConfig, where + ": malformed table header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      table = &root;
      std::size_t begin = 0;
      for (;;) {
        const std::size_t dot = name.find('.', begin);
        const std::string part = trim(name.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin));
        if (!valid_key(part)) fail(ErrorCode::kConfig, where + ": invalid table name '" + name + "'");
        Json& next = (*table)[part];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) fail(ErrorCode::kConfig, where + ": '" + part + "' is already a value");
        table = &next;
        if (dot == std::string::npos) break;
        begin = dot + 1;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kConfig, where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value_text = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(ErrorCode::kConfig, where + ": invalid key '" + key + "'");
    // Arrays may continue over several lines.
    while (bracket_depth(value_text) > 0 && std::getline(in, raw)) {
      ++line_no;
      value_text += " " + trim(strip_comment(raw));
    }
    if (table->contains(key)) fail(ErrorCode::kConfig, where + ": duplicate key '" + key + "'");
    (*table)[key] = ValueParser(value_text, where).parse();
  }
  return root;
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string emit_config(const Json& config) {
  if (!config.is_object()) fail(ErrorCode::kConfig, "config must be a table");
  std::ostringstream out;
  emit_table(out, config, "");
  return out.str();
}

}  // namespace stablefield::cli
