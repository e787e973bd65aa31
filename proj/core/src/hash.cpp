#include "pdl/hash.hpp"

#include <openssl/evp.h>

#include <array>

namespace pdl {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string canonical(const nlohmann::json& doc) { return doc.dump(); }

std::string digest_of(const nlohmann::json& doc) { return sha256_hex(canonical(doc)); }

const std::string& zero_digest() {
    static const std::string z(64, '0');
    return z;
}

}  // namespace pdl
