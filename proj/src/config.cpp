#include "tnlab/config.hpp"

#include "tnlab/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tnlab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw input_error("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            config.sections_[section]; // make the section exist even if empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw input_error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw input_error("config line " + std::to_string(line_no) + ": empty key");
        }
        config.sections_[section].emplace_back(key, value);
    }
    return config;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return std::nullopt;
    std::optional<std::string> result;
    for (const auto& [k, v] : it->second) {
        if (k == key) result = v;
    }
    return result;
}

std::vector<std::string> ConfigFile::get_all(const std::string& section,
                                             const std::string& key) const {
    std::vector<std::string> out;
    const auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [k, v] : it->second) {
        if (k == key) out.push_back(v);
    }
    return out;
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    auto& entries = sections_[section];
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
}

std::string ConfigFile::canonical() const {
    std::ostringstream out;
    for (const auto& [section, entries] : sections_) {
        out << '[' << section << "]\n";
        auto sorted = entries;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [k, v] : sorted) out << k << '=' << v << '\n';
    }
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string trimmed = trim(text);
    if (trimmed.empty()) throw input_error(what + ": empty number");
    char* end = nullptr;
    const double value = std::strtod(trimmed.c_str(), &end);
    if (end != trimmed.c_str() + trimmed.size()) {
        throw input_error(what + ": cannot parse number '" + trimmed + "'");
    }
    return value;
}

} // namespace tnlab
