#ifndef FRACBLOW_CONFIG_HPP
#define FRACBLOW_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

namespace fracblow {

inline constexpr const char* kVersion = "0.1.0";

// Flat key/value experiment configuration with dotted keys. Values are kept
// as canonical strings so that serialization round-trips losslessly and the
// hash is stable across platforms.
class ExperimentConfig {
  public:
    ExperimentConfig();

    static ExperimentConfig from_file(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    double get_num(const std::string& key) const;
    long get_int(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    void set_num(const std::string& key, double value);

    // canonical text form: sorted "key = value" lines
    std::string serialize() const;
    // FNV-1a 64-bit hash of the canonical form, as fixed-width hex
    std::string hash() const;

    void validate() const;

  private:
    std::map<std::string, std::string> kv_;
};

std::string canonical_num(double v);

} // namespace fracblow

#endif
