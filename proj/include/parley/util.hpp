#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace parley {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

namespace util {

inline std::string trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

// Case-insensitive equality after trimming, the comparison used by answer grading.
inline bool loose_equals(std::string_view a, std::string_view b) {
    return iequals(trim(a), trim(b));
}

inline std::string normalize_newlines(std::string s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            if (i + 1 < s.size() && s[i + 1] == '\n') continue;
            out.push_back('\n');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// FNV-1a, 64-bit. Stable across platforms and runs, unlike std::hash.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Deterministic draw in [0, bound) from a 64-bit generator, rejection sampled.
// uniform_int_distribution is implementation-defined, so it cannot be used
// where byte-stable output matters.
template <typename Rng>
uint64_t bounded_draw(Rng& rng, uint64_t bound) {
    if (bound == 0) throw Error("bounded_draw: zero bound");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

}  // namespace util

enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

namespace logging {

struct State {
    LogLevel level = LogLevel::warn;
    std::function<void(LogLevel, const std::string&)> sink;
    std::mutex mu;
};

inline State& state() {
    static State s;
    return s;
}

inline void set_level(LogLevel level) { state().level = level; }

inline void set_sink(std::function<void(LogLevel, const std::string&)> sink) {
    std::lock_guard<std::mutex> lock(state().mu);
    state().sink = std::move(sink);
}

inline void log(LogLevel level, const std::string& msg) {
    State& s = state();
    if (static_cast<int>(level) > static_cast<int>(s.level)) return;
    std::lock_guard<std::mutex> lock(s.mu);
    if (s.sink) {
        s.sink(level, msg);
        return;
    }
    const char* tag = level == LogLevel::error  ? "error"
                      : level == LogLevel::warn ? "warn"
                      : level == LogLevel::info ? "info"
                                                : "debug";
    std::cerr << "[parley " << tag << "] " << msg << "\n";
}

inline void error(const std::string& msg) { log(LogLevel::error, msg); }
inline void warn(const std::string& msg) { log(LogLevel::warn, msg); }
inline void info(const std::string& msg) { log(LogLevel::info, msg); }
inline void debug(const std::string& msg) { log(LogLevel::debug, msg); }

}  // namespace logging
}  // namespace parley
