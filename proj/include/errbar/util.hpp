#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace errbar {

// Shortest decimal form that parses back to the exact same double.
std::string format_double(double v);

// Fixed-decimal form, for axis ticks and log lines.
std::string format_fixed(double v, int decimals);

// Strict parse: whole string must be consumed and the value must be finite.
bool parse_double_strict(std::string_view text, double& out);

std::string_view trim(std::string_view s);

// FNV-1a, used for bundle checksums and data provenance hashes.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t n);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return hash_; }

private:
    std::uint64_t hash_ = 14695981039346656037ull;
};

std::string to_hex(std::uint64_t v);

// Runs fn(0), ..., fn(n-1) over at most `threads` OS threads. Jobs must be
// independent; the first exception thrown by any job is rethrown on the
// calling thread after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace errbar
