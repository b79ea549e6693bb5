#pragma once

// Flat `key = value` configuration files with optional [section] headers.
//
//   # comment
//   tol = 1e-4            <- global, visible to every experiment
//   [ade-efficiency]
//   P = 2,4,8,16,32       <- only for ade-efficiency
//
// Lookups resolve overrides first, then the experiment's section, then the
// global keys, then the experiment's declared default.

#include "pebk/error.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pebk {

class ConfigError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class Config {
public:
  using Section = std::map<std::string, std::string>;

  /// Throws ConfigError naming the offending line.
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  /// Canonical text: global keys first, then sections in name order.
  std::string serialize() const;

  void set(const std::string& section, const std::string& key, std::string value);
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  /// Section "" holds the global keys.
  const std::map<std::string, Section>& sections() const noexcept { return sections_; }

  bool operator==(const Config& other) const { return sections_ == other.sections_; }

private:
  std::map<std::string, Section> sections_;
};

struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Parameters of one experiment after resolving overrides, file and defaults.
class ExperimentConfig {
public:
  ExperimentConfig(std::string id, const std::vector<ParamSpec>& spec, const Config& file,
                   const std::vector<std::pair<std::string, std::string>>& overrides);

  const std::string& id() const noexcept { return id_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;
  /// Value must be one of `choices`.
  std::string get_choice(const std::string& key, const std::vector<std::string>& choices) const;

private:
  std::string id_;
  std::map<std::string, std::string> values_;
};

/// "k=v" -> {k, v}; throws ConfigError when malformed.
std::pair<std::string, std::string> parse_assignment(std::string_view text);

}  // namespace pebk
