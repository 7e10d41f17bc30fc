#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fcd/errors.hpp"
#include "fcd/version.hpp"

namespace fcdtool {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kFailure = 1, kIoError = 2, kValidation = 3, kNumerical = 4 };

/// Reads CLI11 configuration from JSON. Nested objects map to subcommand
/// sections, arrays to repeated values: {"optimize": {"steps": 500}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConversionError("JSON config output is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  static void walk(const nlohmann::json& j, const std::vector<std::string>& parents,
                   std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      out.push_back(std::move(item));
    }
  }
};

/// 64-bit FNV-1a over the file bytes, as "fnv1a64:<hex>".
inline std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fcd::IoError("cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

/// Every option of a subcommand as argv tokens with defaults filled in, so a
/// replay does not depend on the defaults of a later toolkit version.
/// Options named in `skip` (e.g. the output location) are left out.
inline std::vector<std::string> resolved_args(const CLI::App& sub, const std::vector<std::string>& skip) {
  std::vector<std::string> args;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty() || name.front() != '-') continue;
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    if (opt->get_type_size() == 0) {  // flag
      if (opt->count() > 0) args.push_back(name);
      continue;
    }
    std::vector<std::string> values;
    if (opt->count() > 0)
      values = opt->results();
    else if (!opt->get_default_str().empty())
      values = {opt->get_default_str()};
    if (values.empty()) continue;
    args.push_back(name);
    for (auto& v : values) args.push_back(v);
  }
  return args;
}

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::vector<fs::path> inputs;

  ordered_json to_json() const {
    ordered_json inputs_json = ordered_json::object();
    for (const auto& p : inputs) inputs_json[p.string()] = file_digest(p);
    return {{"tool", "fcdtool"}, {"version", fcd::kVersion}, {"command", command},
            {"args", args},      {"seed", seed},               {"inputs", inputs_json}};
  }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw fcd::IoError("cannot write manifest in '" + dir.string() + "'");
    out << to_json().dump(2) << '\n';
  }
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fcd::IoError("cannot write '" + path.string() + "'");
  out << text;
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw fcd::IoError("cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace fcdtool
