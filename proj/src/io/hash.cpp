#include "evl/io/hash.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace evl::io {

namespace {

std::string digest_hex(const EVP_MD* md, std::initializer_list<std::string_view> parts) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) throw std::runtime_error("digest initialization failed");
    for (auto part : parts)
        if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) throw std::runtime_error("digest update failed");
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), out, &len) != 1) throw std::runtime_error("digest finalization failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string s(2 * len, '0');
    for (unsigned i = 0; i < len; ++i) {
        s[2 * i] = hex[out[i] >> 4];
        s[2 * i + 1] = hex[out[i] & 15];
    }
    return s;
}

}  // namespace

std::string git_blob_sha1(std::string_view data) {
    const std::string header = "blob " + std::to_string(data.size());
    return digest_hex(EVP_sha1(), {header, std::string_view("\0", 1), data});
}

std::string sha256_hex(std::string_view data) { return digest_hex(EVP_sha256(), {data}); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace evl::io
