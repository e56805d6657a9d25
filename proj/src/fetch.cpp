#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "treesmooth/datagen.hpp"

namespace treesmooth {

namespace {

struct ParsedUrl {
    std::string scheme_host;  // e.g. "https://example.org"
    std::string path;         // e.g. "/data/file.csv"
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::runtime_error("fetch_dataset: malformed url (missing scheme): " + url);
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw std::runtime_error("fetch_dataset: unsupported scheme '" + scheme + "'");
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.scheme_host = url;
        parsed.path = "/";
    } else {
        parsed.scheme_host = url.substr(0, path_start);
        parsed.path = url.substr(path_start);
    }
    if (parsed.scheme_host.size() <= scheme_end + 3)
        throw std::runtime_error("fetch_dataset: malformed url (missing host): " + url);
    return parsed;
}

}  // namespace

std::string fetch_dataset(const std::string& url, const std::string& destination_path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(destination_path, ec) && fs::file_size(destination_path, ec) > 0)
        return destination_path;

    auto parsed = parse_url(url);
    httplib::Client client(parsed.scheme_host);
    client.set_connection_timeout(15, 0);
    client.set_read_timeout(60, 0);
    client.set_follow_location(true);

    const std::string tmp_path = destination_path + ".part";
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out) throw std::runtime_error("fetch_dataset: cannot write to " + tmp_path);
        auto res = client.Get(parsed.path, [&](const char* chunk, size_t len) {
            out.write(chunk, static_cast<std::streamsize>(len));
            return static_cast<bool>(out);
        });
        if (!res || res->status < 200 || res->status >= 300) {
            out.close();
            std::remove(tmp_path.c_str());
            std::string reason = res ? ("HTTP status " + std::to_string(res->status))
                                     : ("transport error: " + httplib::to_string(res.error()));
            throw std::runtime_error("fetch_dataset: download failed for " + url + " (" + reason +
                                     ")");
        }
    }
    fs::rename(tmp_path, destination_path, ec);
    if (ec) {
        std::remove(tmp_path.c_str());
        throw std::runtime_error("fetch_dataset: cannot move download into place: " +
                                 ec.message());
    }
    return destination_path;
}

}  // namespace treesmooth
