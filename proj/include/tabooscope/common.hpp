#pragma once

// Shared plumbing: error types, delimited-text helpers, UTC instants,
// full-precision number formatting and content digests.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tabooscope {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Seconds since the Unix epoch, UTC.
using Instant = std::int64_t;

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

inline bool istarts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

// Tabs and newlines inside a field would break the row structure.
inline std::string sanitize_field(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view what = "integer") {
    s = trim(s);
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
    return value;
}

inline double parse_double(std::string_view s, std::string_view what = "number") {
    s = trim(s);
    double value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
    return value;
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline std::string format_fixed(double v, int decimals) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, v);
    return buf.data();
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" and "YYYY-MM-DDTHH:MM:SSZ".
inline Instant parse_instant(std::string_view s) {
    using namespace std::chrono;
    s = trim(s);
    auto num = [&](std::size_t pos, std::size_t len) {
        if (pos + len > s.size()) throw ParseError("invalid timestamp: '" + std::string(s) + "'");
        return parse_int<int>(s.substr(pos, len), "timestamp");
    };
    if (s.size() < 10 || s[4] != '-' || s[7] != '-')
        throw ParseError("invalid timestamp: '" + std::string(s) + "'");
    year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                       day{static_cast<unsigned>(num(8, 2))}};
    if (!ymd.ok()) throw ParseError("invalid date: '" + std::string(s) + "'");
    long long secs = 0;
    if (s.size() > 10) {
        if ((s[10] != 'T' && s[10] != ' ') || s.size() < 19 || s[13] != ':' || s[16] != ':')
            throw ParseError("invalid timestamp: '" + std::string(s) + "'");
        secs = num(11, 2) * 3600LL + num(14, 2) * 60LL + num(17, 2);
        if (s.size() > 19 && !(s.size() == 20 && s[19] == 'Z'))
            throw ParseError("invalid timestamp: '" + std::string(s) + "'");
    }
    return static_cast<Instant>(sys_days{ymd}.time_since_epoch().count()) * 86400 + secs;
}

inline std::string format_instant(Instant t) {
    using namespace std::chrono;
    auto days = sys_days{std::chrono::days{t >= 0 ? t / 86400 : (t - 86399) / 86400}};
    long long rem = t - static_cast<long long>(days.time_since_epoch().count()) * 86400;
    year_month_day ymd{days};
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), rem / 3600, (rem % 3600) / 60, rem % 60);
    return buf.data();
}

// "YYYY-MM" bucket of an instant.
inline std::string month_of(Instant t) { return format_instant(t).substr(0, 7); }

inline std::string hex_encode(const unsigned char* data, std::size_t len) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0x0f]);
    }
    return out;
}

// Incremental message digest over arbitrary byte chunks.
class Digest {
  public:
    explicit Digest(const EVP_MD* md) : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, md, nullptr) != 1)
            throw std::runtime_error("digest init failed");
    }
    Digest(const Digest&) = delete;
    Digest& operator=(const Digest&) = delete;
    ~Digest() { EVP_MD_CTX_free(ctx_); }

    Digest& update(std::string_view data) {
        EVP_DigestUpdate(ctx_, data.data(), data.size());
        return *this;
    }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md.data(), &len);
        return hex_encode(md.data(), len);
    }

  private:
    EVP_MD_CTX* ctx_;
};

class Sha256 : public Digest {
  public:
    Sha256() : Digest(EVP_sha256()) {}
};

class Sha1 : public Digest {
  public:
    Sha1() : Digest(EVP_sha1()) {}
};

inline std::string sha256_hex(std::string_view data) { return Sha256().update(data).hex(); }

inline std::string sha1_hex(std::string_view data) { return Sha1().update(data).hex(); }

// Reads a file of one entry per line; blank lines and '#' comments ignored.
inline std::vector<std::string> read_word_list(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.emplace_back(w);
    }
    return words;
}

}  // namespace tabooscope
