#include "pebk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace pebk {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("parameter '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("parameter '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(section)) throw ConfigError(where + "invalid section name '" + section + "'");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key)) throw ConfigError(where + "invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    auto& sec = cfg.sections_[section];
    if (sec.count(key) != 0) throw ConfigError(where + "duplicate key '" + key + "'");
    sec[key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::serialize() const {
  std::string out;
  auto emit = [&out](const Section& sec) {
    for (const auto& [k, v] : sec) out += k + " = " + v + "\n";
  };
  if (const auto it = sections_.find(""); it != sections_.end()) emit(it->second);
  for (const auto& [name, sec] : sections_) {
    if (name.empty()) continue;
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    emit(sec);
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, std::string value) {
  if (!section.empty() && !valid_name(section)) throw ConfigError("invalid section name '" + section + "'");
  if (!valid_name(key)) throw ConfigError("invalid key '" + key + "'");
  sections_[section][key] = std::move(value);
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) return std::nullopt;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return std::nullopt;
  return it->second;
}

std::pair<std::string, std::string> parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(text) + "' must look like key=value");
  }
  std::string key = trim(text.substr(0, eq));
  std::string value = trim(text.substr(eq + 1));
  if (!valid_name(key) || value.empty()) {
    throw ConfigError("override '" + std::string(text) + "' must look like key=value");
  }
  return {std::move(key), std::move(value)};
}

ExperimentConfig::ExperimentConfig(std::string id, const std::vector<ParamSpec>& spec,
                                   const Config& file,
                                   const std::vector<std::pair<std::string, std::string>>& overrides)
    : id_(std::move(id)) {
  std::set<std::string> known;
  for (const auto& p : spec) {
    known.insert(p.key);
    values_[p.key] = p.default_value;
  }
  auto known_list = [&] {
    std::string s;
    for (const auto& k : known) s += (s.empty() ? "" : ", ") + k;
    return s;
  };
  if (const auto g = file.sections().find(""); g != file.sections().end()) {
    for (const auto& [k, v] : g->second) {
      if (known.count(k) != 0) values_[k] = v;
    }
  }
  if (const auto s = file.sections().find(id_); s != file.sections().end()) {
    for (const auto& [k, v] : s->second) {
      if (known.count(k) == 0) {
        throw ConfigError("unknown parameter '" + k + "' in section [" + id_ + "]; known: " +
                          known_list());
      }
      values_[k] = v;
    }
  }
  for (const auto& [k, v] : overrides) {
    if (known.count(k) == 0) {
      throw ConfigError("unknown parameter '" + k + "' for experiment '" + id_ + "'; known: " +
                        known_list());
    }
    values_[k] = v;
  }
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("experiment '" + id_ + "' has no parameter '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return to_double(key, get_string(key));
}

int ExperimentConfig::get_int(const std::string& key) const { return to_int(key, get_string(key)); }

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("parameter '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key))) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("parameter '" + key + "': empty list");
  return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(get_string(key))) out.push_back(to_int(key, item));
  if (out.empty()) throw ConfigError("parameter '" + key + "': empty list");
  return out;
}

std::string ExperimentConfig::get_choice(const std::string& key,
                                         const std::vector<std::string>& choices) const {
  const std::string v = get_string(key);
  if (std::find(choices.begin(), choices.end(), v) != choices.end()) return v;
  std::string list;
  for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
  throw ConfigError("parameter '" + key + "': '" + v + "' is not one of " + list);
}

}  // namespace pebk
