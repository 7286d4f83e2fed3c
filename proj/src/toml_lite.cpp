#include "mlpcm/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mlpcm {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Json run() {
    Json root = Json::object();
    Json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') error("arrays of tables are not supported");
        table = &root;
        for (const auto& part : split_key(read_until(']'))) {
          Json& next = (*table)[part];
          if (next.is_null()) next = Json::object();
          if (!next.is_object()) error("'" + part + "' is not a table");
          table = &next;
        }
        ++pos_;
        end_of_line();
        continue;
      }
      const auto parts = split_key(read_until('='));
      ++pos_;
      Json* target = table;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        Json& next = (*target)[parts[i]];
        if (next.is_null()) next = Json::object();
        target = &next;
      }
      if (target->contains(parts.back())) error("duplicate key '" + parts.back() + "'");
      (*target)[parts.back()] = value();
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n' ? 1 : 0;
    fail(Errc::config_error, "toml line " + std::to_string(line) + ": " + what);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  // Whitespace, newlines and comments.
  void skip_blank_lines() {
    while (!eof()) {
      skip_spaces();
      if (peek() == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (peek() == '\n') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_spaces();
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
    if (!eof() && peek() != '\n') error("unexpected trailing characters");
  }

  std::string read_until(char stop) {
    const std::size_t start = pos_;
    while (!eof() && peek() != stop && peek() != '\n') ++pos_;
    if (peek() != stop) error(std::string("expected '") + stop + "'");
    return s_.substr(start, pos_ - start);
  }

  std::vector<std::string> split_key(const std::string& raw) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : raw + ".") {
      if (c == '.') {
        std::size_t a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
        if (a == std::string::npos) error("empty key");
        std::string key = cur.substr(a, b - a + 1);
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
        parts.push_back(key);
        cur.clear();
      } else {
        cur += c;
      }
    }
    return parts;
  }

  Json value() {
    skip_spaces();
    const char c = peek();
    if (c == '"' || c == '\'') return string_value(c);
    if (c == '[') return array_value();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number_value();
  }

  Json string_value(char quote) {
    ++pos_;
    std::string out;
    while (!eof() && peek() != quote) {
      char ch = s_[pos_++];
      if (ch == '\n') error("unterminated string");
      if (quote == '"' && ch == '\\') {
        const char esc = s_[pos_++];
        switch (esc) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: error("unsupported escape");
        }
      }
      out += ch;
    }
    if (eof()) error("unterminated string");
    ++pos_;
    return out;
  }

  Json array_value() {
    ++pos_;
    Json arr = Json::array();
    while (true) {
      skip_blank_lines();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(value());
      skip_blank_lines();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        error("expected ',' or ']' in array");
      }
    }
  }

  Json number_value() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_'))
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    std::erase(tok, '_');
    if (tok.empty()) error("expected a value");
    if (tok == "inf" || tok == "+inf") return "inf";
    if (tok == "-inf") return "-inf";
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } else {
        const long long v = std::stoll(tok, &used);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    error("bad value '" + tok + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Json parse_toml(const std::string& text) { return Parser(text).run(); }

Json read_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config_error, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace mlpcm
