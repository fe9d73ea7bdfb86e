#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tnlab {

/// Flat key-value configuration text with [section] headers. Keys may repeat
/// within a section (used for point lists); '#' and ';' start comments.
///
///   [model]
///   kind = appendix
///   k = 1e8
///
///   [points]
///   point = 0.25 -1.5
///   point = 0.0 0.0
class ConfigFile {
  public:
    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    /// Last value for the key, or empty. Section "" is the preamble.
    std::optional<std::string> get(const std::string& section, const std::string& key) const;

    /// Every value listed for the key, in file order.
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

    bool has_section(const std::string& section) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Canonical text form (sections and keys sorted, values in file order);
    /// the basis for config hashing.
    std::string canonical() const;

  private:
    // section -> ordered (key, value) pairs
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
};

/// FNV-1a 64-bit hash, for config fingerprints in reports.
std::uint64_t fnv1a64(const std::string& text);

/// Parses a double with full-string validation; throws input_error.
double parse_double(const std::string& text, const std::string& what);

} // namespace tnlab
