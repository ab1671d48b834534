#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace predkit {

/// Decimal serialization with 17 significant digits: round-trips any 64-bit
/// float exactly.
std::string format_double(double v);

/// Minimal deterministic JSON emitter. Keys are written in the order given;
/// numbers go through format_double.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array(const std::string& key = "");
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(long long v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value_null();
    JsonWriter& kv(const std::string& k, double v);
    JsonWriter& kv(const std::string& k, long long v);
    JsonWriter& kv(const std::string& k, std::uint64_t v);
    JsonWriter& kv(const std::string& k, const std::string& v);
    JsonWriter& kv_null(const std::string& k);

    std::string str() const { return out_; }

private:
    void separate();
    static std::string escape(const std::string& s);

    std::string out_;
    std::vector<bool> first_in_scope_;
    bool pending_key_ = false;
};

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

/// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::string& path);

/// Writes bytes to a file, overwriting; throws on failure.
void write_file(const std::string& path, const std::string& bytes);

}  // namespace predkit
