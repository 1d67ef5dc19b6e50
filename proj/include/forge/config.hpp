#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace forge {

// Flat key=value run configuration. '#' starts a comment; keys not in the
// registry are rejected. Every run writes a resolved copy of the config it
// actually used next to its outputs.
class RunConfig {
  public:
    RunConfig() = default;
    static RunConfig parse_file(const std::filesystem::path& p);
    static RunConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int def) const;
    long long get_i64(const std::string& key, long long def) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    std::vector<double> get_list(const std::string& key) const;  // comma-separated

    void set(const std::string& key, const std::string& value);
    void write_resolved(const std::filesystem::path& p) const;

    static const std::vector<std::string>& known_keys();

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace forge
