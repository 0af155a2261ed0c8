#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include <openssl/evp.h>

namespace sepris::detail {

// Raw single-block AES-128 (ECB, no padding); building block for the
// counter-mode keystreams used by the codec.
class Aes128 {
public:
    using Block16 = std::array<std::uint8_t, 16>;

    explicit Aes128(const Block16& key) : ctx_(EVP_CIPHER_CTX_new()) {
        if (!ctx_) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
        if (EVP_EncryptInit_ex(ctx_, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
            EVP_CIPHER_CTX_free(ctx_);
            throw std::runtime_error("EVP_EncryptInit_ex failed");
        }
        EVP_CIPHER_CTX_set_padding(ctx_, 0);
    }

    ~Aes128() { EVP_CIPHER_CTX_free(ctx_); }

    Aes128(const Aes128&) = delete;
    Aes128& operator=(const Aes128&) = delete;

    Block16 encrypt_block(const Block16& in) const {
        Block16 out{};
        int len = 0;
        if (EVP_EncryptUpdate(ctx_, out.data(), &len, in.data(), 16) != 1 || len != 16) {
            throw std::runtime_error("EVP_EncryptUpdate failed");
        }
        return out;
    }

private:
    EVP_CIPHER_CTX* ctx_;
};

}  // namespace sepris::detail
