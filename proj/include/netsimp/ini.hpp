#ifndef NETSIMP_INI_HPP
#define NETSIMP_INI_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsimp {

/// Minimal `[section]` / `key = value` config reader. Lines starting with
/// '#' or ';' are comments. Keys are addressed as "section.key".
class IniFile {
public:
    static IniFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    static IniFile parse(const std::string& text, const std::string& name = "<config>") {
        IniFile ini;
        std::istringstream in(text);
        std::string line, section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string s = trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                             ": unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                         ": expected 'key = value'");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty key");
            ini.values_[section.empty() ? key : section + "." + key] = value;
        }
        return ini;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const double x = to_double(key, it->second);
        const long n = static_cast<long>(x);
        if (static_cast<double>(n) != x)
            throw std::runtime_error("config: key '" + key + "' must be an integer");
        return n;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw std::runtime_error("config: key '" + key + "' must be a boolean");
    }

    /// Comma-separated list value.
    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::istringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string v = trim(item);
            if (!v.empty()) out.push_back(v);
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    static std::string trim(const std::string& s) {
        size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static double to_double(const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return x;
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' has non-numeric value '" + v +
                                     "'");
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace netsimp

#endif  // NETSIMP_INI_HPP
