#include "forge/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace forge {

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = {
        // grid / time
        "N", "dt", "horizon", "seed", "out",
        // noise
        "rho", "alpha", "sigma", "delta", "noise_kmax", "noise_model",
        // stopping / iteration
        "L", "c_R", "lambda", "delta_amp", "ell", "mu", "stages", "mode", "flow_substeps",
        "tau_n_max", "K",
        // ledger
        "b", "c", "eps", "q_max", "margin", "c0", "T", "a_log2_cap", "N0",
        // galerkin
        "K_G", "ensemble", "x0_scale",
    };
    return keys;
}

RunConfig RunConfig::parse_string(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": missing '='");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
        val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));
        const auto& known = known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::runtime_error("config: unknown key '" + key + "'");
        cfg.kv_[key] = val;
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("config: cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

double RunConfig::get_double(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("config: missing key '" + key + "'");
    return std::stod(it->second);
}
double RunConfig::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::stod(it->second);
}
int RunConfig::get_int(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("config: missing key '" + key + "'");
    return std::stoi(it->second);
}
int RunConfig::get_int(const std::string& key, int def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::stoi(it->second);
}
long long RunConfig::get_i64(const std::string& key, long long def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::stoll(it->second);
}
std::string RunConfig::get_string(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    auto it = kv_.find(key);
    std::vector<double> out;
    if (it == kv_.end()) return out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

void RunConfig::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void RunConfig::write_resolved(const std::filesystem::path& p) const {
    std::ofstream out(p);
    for (const auto& [k, v] : kv_) out << k << "=" << v << "\n";
}

}  // namespace forge
