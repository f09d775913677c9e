#ifndef DRHEO_CONFIG_HPP
#define DRHEO_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drheo/rheology.hpp"

namespace drheo {

// Dotted-key `key = value` configuration, `#` comments, arrays as comma
// lists. Values stay strings until typed access.
class config {
  public:
    static config parse_file(const std::string& path);
    static config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get_string(const std::string& key, const std::string& dflt = "") const;
    double get_double(const std::string& key, double dflt) const;
    double require_double(const std::string& key) const;
    long get_long(const std::string& key, long dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    // sorted key = value text of everything, for the self-describing echo
    std::string echo() const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

    // rheology.* block -> validated model (grid.d supplies the dimension)
    rheology_model make_model() const;

  private:
    std::map<std::string, std::string> kv_;
};

} // namespace drheo

#endif
