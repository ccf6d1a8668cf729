#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcn/core/error.hpp"

// Mock primitives. Digests are real SHA-256 and signatures are HMAC-SHA256,
// but key pairs are derived from a shared nonce, so anyone holding pk could
// in principle recompute sk. That is fine for checking protocol logic and
// nothing else.

namespace pcn::proto {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline Digest sha256(const Bytes& data) {
    Digest d{};
    SHA256(data.data(), data.size(), d.data());
    return d;
}

inline Digest hmac_sha256(const Digest& key, const Bytes& data) {
    Digest d{};
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), d.data(), &len);
    ensure(len == d.size(), "unexpected HMAC length");
    return d;
}

inline std::string hex(const Digest& d, std::size_t bytes = 32) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < bytes && i < d.size(); ++i) {
        s.push_back(kHex[d[i] >> 4]);
        s.push_back(kHex[d[i] & 15]);
    }
    return s;
}

// Length-prefixed concatenation, so field boundaries cannot be shifted.
class Encoder {
public:
    Encoder& put(std::string_view s) { return put_raw(s.data(), s.size()); }
    Encoder& put(const Bytes& b) { return put_raw(b.data(), b.size()); }
    Encoder& put(const Digest& d) { return put_raw(d.data(), d.size()); }
    Encoder& put(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        return put_raw(b, 8);
    }
    const Bytes& bytes() const { return out_; }

private:
    Encoder& put_raw(const void* p, std::size_t n) {
        const auto len = static_cast<std::uint32_t>(n);
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
        const auto* c = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), c, c + n);
        return *this;
    }
    Bytes out_;
};

class Decoder {
public:
    explicit Decoder(const Bytes& b) : in_(b) {}

    Bytes bytes() {
        const auto n = length();
        Bytes out(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }
    std::string str() {
        const auto b = bytes();
        return std::string(b.begin(), b.end());
    }
    std::uint64_t u64() {
        const auto b = bytes();
        ensure(b.size() == 8, "malformed integer field");
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }
    Digest digest() {
        const auto b = bytes();
        ensure(b.size() == 32, "malformed digest field");
        Digest d{};
        std::copy(b.begin(), b.end(), d.begin());
        return d;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    std::size_t length() {
        ensure(pos_ + 4 <= in_.size(), "truncated encoding");
        std::uint32_t n = 0;
        for (int i = 3; i >= 0; --i) n = (n << 8) | in_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        ensure(pos_ + n <= in_.size(), "truncated encoding");
        return n;
    }
    const Bytes& in_;
    std::size_t pos_ = 0;
};

enum class KeyScope { Processor, Transaction, TransactionUnit };

struct PublicKey {
    Digest id{};
    friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

// sk lives only in enclave-side state; nothing in this module serializes it.
struct SecretKey {
    Digest key{};
    Digest pk_id{};
};

struct MockKeypair {
    PublicKey pk;
    SecretKey sk;
    KeyScope scope = KeyScope::Processor;
};

inline Digest derive_secret(const Digest& pk_id) { return sha256(Encoder().put("sk").put(pk_id).bytes()); }

inline MockKeypair mock_keygen(std::uint64_t nonce, KeyScope scope) {
    MockKeypair kp;
    kp.scope = scope;
    kp.pk.id = sha256(Encoder().put("pk").put(nonce).put(static_cast<std::uint64_t>(scope)).bytes());
    kp.sk.pk_id = kp.pk.id;
    kp.sk.key = derive_secret(kp.pk.id);
    return kp;
}

using Signature = Digest;

inline Signature mock_sign(const SecretKey& sk, const Bytes& payload) { return hmac_sha256(sk.key, payload); }

inline bool mock_verify(const PublicKey& pk, const Signature& sigma, const Bytes& payload) {
    return hmac_sha256(derive_secret(pk.id), payload) == sigma;
}

// Reversible encoding: payload XOR an HMAC counter stream keyed by the key
// id, plus a tag so a wrong key fails loudly instead of yielding garbage.
struct MockCiphertext {
    Digest key_id{};
    Bytes payload;
    Digest tag{};

    std::size_t leak_len() const { return payload.size(); }
};

namespace detail {
inline void apply_stream(const Digest& key, Bytes& data) {
    for (std::size_t block = 0; block * 32 < data.size(); ++block) {
        const auto pad = hmac_sha256(key, Encoder().put("stream").put(static_cast<std::uint64_t>(block)).bytes());
        for (std::size_t i = 0; i < 32 && block * 32 + i < data.size(); ++i) data[block * 32 + i] ^= pad[i];
    }
}
}  // namespace detail

inline MockCiphertext mock_encrypt(const PublicKey& pk, const Bytes& plain) {
    MockCiphertext c;
    c.key_id = pk.id;
    c.payload = plain;
    const auto key = derive_secret(pk.id);
    detail::apply_stream(key, c.payload);
    c.tag = hmac_sha256(key, c.payload);
    return c;
}

// nullopt when sk does not match the key the ciphertext was made under.
inline std::optional<Bytes> mock_decrypt(const SecretKey& sk, const MockCiphertext& c) {
    if (sk.pk_id != c.key_id || hmac_sha256(sk.key, c.payload) != c.tag) return std::nullopt;
    Bytes plain = c.payload;
    detail::apply_stream(sk.key, plain);
    return plain;
}

}  // namespace pcn::proto
