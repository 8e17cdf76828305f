#pragma once

// HTTP(S) transport for live-mode enrichment clients.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <string>

#include "enrichment.hpp"

namespace tabooscope {

// base_url: "https://host[:port][/prefix]"; endpoints are appended as "/<endpoint>".
class HttpTransport : public Transport {
  public:
    explicit HttpTransport(const std::string& base_url, int timeout_seconds = 30) {
        auto scheme_end = base_url.find("://");
        auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        origin_ = base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        timeout_ = timeout_seconds;
    }

    std::string post(const std::string& endpoint, const std::string& body) override {
        httplib::Client cli(origin_);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        auto res = cli.Post(prefix_ + "/" + endpoint, body, "application/json");
        if (!res) throw TransportError("request to " + endpoint + " failed: " + httplib::to_string(res.error()));
        if (res->status != 200) throw TransportError("request to " + endpoint + " returned HTTP " + std::to_string(res->status));
        return res->body;
    }

  private:
    std::string origin_;
    std::string prefix_;
    int timeout_ = 30;
};

}  // namespace tabooscope
