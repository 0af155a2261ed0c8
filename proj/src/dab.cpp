#include "sepris/dab.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "aes128.hpp"
#include "sepris/common.hpp"

namespace sepris::dab {

namespace {

// Standard luminance quantization base table.
constexpr int kBaseQuant[kDctSize][kDctSize] = {
    {16, 11, 10, 16, 24, 40, 51, 61},
    {12, 12, 14, 19, 26, 58, 60, 55},
    {14, 13, 16, 24, 40, 57, 69, 56},
    {14, 17, 22, 29, 51, 87, 80, 62},
    {18, 22, 37, 56, 68, 109, 103, 77},
    {24, 35, 55, 64, 81, 104, 113, 92},
    {49, 64, 78, 87, 103, 121, 120, 101},
    {72, 92, 95, 98, 112, 100, 103, 99},
};

bool is_zero_key(const Key128& k) {
    for (auto b : k) {
        if (b != 0) return false;
    }
    return true;
}

void check_quality(int quality) {
    if (quality < 1 || quality > 100) {
        throw Error(Errc::InvalidQuality, "quality must be in [1, 100]");
    }
}

std::uint32_t pad_up(std::uint32_t n, std::uint32_t m) {
    return (n + m - 1) / m * m;
}

// The float->integer stages (quantizer, pixel rounder) first snap the
// transform output to a 1/256 grid and then round in integer arithmetic,
// ties away from zero. Deciding ties on the snapped value instead of the
// raw double makes the integer pipeline reproducible across conforming
// implementations regardless of their summation order.
long long snap256(double v) { return std::llround(v * 256.0); }

// round(num / den) with halves away from zero; num is in 1/256 units.
long long round_snapped(long long num256, long long den) {
    const long long d = den * 256;
    return num256 >= 0 ? (2 * num256 + d) / (2 * d) : -((-2 * num256 + d) / (2 * d));
}

// Counter block for the coefficient layer: the 16-byte nonce XOR a position
// word with channel at byte 8, block row / column as 24-bit little-endian
// fields at bytes 9..11 and 12..14, and the record half at byte 15.
detail::Aes128::Block16 coeff_counter(const Key128& nonce, std::uint32_t channel,
                                      std::uint32_t block_row, std::uint32_t block_col,
                                      std::uint8_t half) {
    detail::Aes128::Block16 ctr{};
    std::memcpy(ctr.data(), nonce.data(), 16);
    ctr[8] ^= std::uint8_t(channel);
    ctr[9] ^= std::uint8_t(block_row);
    ctr[10] ^= std::uint8_t(block_row >> 8);
    ctr[11] ^= std::uint8_t(block_row >> 16);
    ctr[12] ^= std::uint8_t(block_col);
    ctr[13] ^= std::uint8_t(block_col >> 8);
    ctr[14] ^= std::uint8_t(block_col >> 16);
    ctr[15] ^= half;
    return ctr;
}

// Uniform draws for the tile permutation: AES over (frame_index, counter)
// blocks, two 64-bit words per block, rejection-sampled to remove bias.
class PermStream {
public:
    PermStream(const Key128& seed, std::uint64_t frame_index)
        : aes_(seed), frame_index_(frame_index) {}

    std::uint64_t next_u64() {
        if (pending_.empty()) {
            detail::Aes128::Block16 in{};
            put_u64_at(in.data(), frame_index_);
            put_u64_at(in.data() + 8, counter_++);
            auto out = aes_.encrypt_block(in);
            pending_.push_back(read_u64_at(out.data()));
            pending_.push_back(read_u64_at(out.data() + 8));
        }
        std::uint64_t v = pending_.back();
        pending_.pop_back();
        return v;
    }

    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) return v % bound;
        }
    }

private:
    static void put_u64_at(std::uint8_t* p, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) p[i] = std::uint8_t(v >> (8 * i));
    }
    static std::uint64_t read_u64_at(const std::uint8_t* p) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        return v;
    }

    detail::Aes128 aes_;
    std::uint64_t frame_index_;
    std::uint64_t counter_ = 0;
    std::vector<std::uint64_t> pending_;
};

std::vector<std::uint32_t> derive_permutation(const Key128& seed, std::uint64_t frame_index,
                                              std::uint32_t count) {
    std::vector<std::uint32_t> perm(count);
    for (std::uint32_t i = 0; i < count; ++i) perm[i] = i;
    PermStream stream(seed, frame_index);
    for (std::uint32_t i = count; i > 1; --i) {
        auto j = std::uint32_t(stream.uniform(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Hash256 permutation_digest(const std::vector<std::uint32_t>& perm, std::uint64_t frame_index) {
    Sha256 h;
    h.update("sepris.dab.perm");
    h.update_u64(frame_index);
    Bytes buf;
    buf.reserve(perm.size() * 4);
    for (auto v : perm) put_u32(buf, v);
    h.update(buf);
    return h.finish();
}

void check_tile_grid(const CoefficientPlane& plane) {
    plane.validate();
    if (plane.padded_width % kTileSize != 0 || plane.padded_height % kTileSize != 0) {
        throw Error(Errc::GeometryError, "plane dimensions must be multiples of the tile size");
    }
}

// Copy one 32x32 tile between planes (same channel count and dims).
void copy_tile(const CoefficientPlane& src, std::uint32_t src_tile, CoefficientPlane& dst,
               std::uint32_t dst_tile) {
    const std::uint32_t grid_w = src.padded_width / kTileSize;
    const std::uint32_t sy = (src_tile / grid_w) * kTileSize;
    const std::uint32_t sx = (src_tile % grid_w) * kTileSize;
    const std::uint32_t dy = (dst_tile / grid_w) * kTileSize;
    const std::uint32_t dx = (dst_tile % grid_w) * kTileSize;
    for (std::uint32_t c = 0; c < src.channels; ++c) {
        for (std::uint32_t row = 0; row < kTileSize; ++row) {
            const std::size_t s =
                c * src.plane_size() + std::size_t(sy + row) * src.padded_width + sx;
            const std::size_t d =
                c * dst.plane_size() + std::size_t(dy + row) * dst.padded_width + dx;
            std::memcpy(&dst.coefficients[d], &src.coefficients[s], kTileSize * sizeof(std::int16_t));
        }
    }
}

}  // namespace

void CoefficientPlane::validate() const {
    if (padded_width == 0 || padded_height == 0) {
        throw Error(Errc::GeometryError, "empty coefficient plane");
    }
    if (padded_width % kDctSize != 0 || padded_height % kDctSize != 0) {
        throw Error(Errc::GeometryError, "plane dimensions must be multiples of 8");
    }
    if (channels != 1 && channels != 3) {
        throw Error(Errc::GeometryError, "plane must have 1 or 3 channels");
    }
    if (original_width > padded_width || original_height > padded_height) {
        throw Error(Errc::GeometryError, "original dims exceed padded dims");
    }
    if (coefficients.size() != size()) {
        throw Error(Errc::GeometryError, "coefficient count does not match dims");
    }
}

DctMatrix dct_matrix() {
    DctMatrix t{};
    const double n = kDctSize;
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) {
            if (i == 0) {
                t.entries[i][j] = 1.0 / std::sqrt(n);
            } else {
                t.entries[i][j] =
                    std::sqrt(2.0 / n) * std::cos((2 * j + 1) * i * std::numbers::pi / (2 * n));
            }
        }
    }
    return t;
}

namespace {

Block multiply(const Block& a, const Block& b) {
    Block out{};
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) {
            double acc = 0.0;
            for (int k = 0; k < kDctSize; ++k) acc += a[i][k] * b[k][j];
            out[i][j] = acc;
        }
    }
    return out;
}

Block transpose(const Block& a) {
    Block out{};
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) out[j][i] = a[i][j];
    }
    return out;
}

const Block& transform_matrix() {
    static const Block t = [] {
        Block b{};
        auto m = dct_matrix();
        for (int i = 0; i < kDctSize; ++i) {
            for (int j = 0; j < kDctSize; ++j) b[i][j] = m.entries[i][j];
        }
        return b;
    }();
    return t;
}

}  // namespace

Block forward_dct(const Block& values) {
    const Block& t = transform_matrix();
    return multiply(multiply(t, values), transpose(t));
}

Block inverse_dct(const Block& coeffs) {
    const Block& t = transform_matrix();
    return multiply(multiply(transpose(t), coeffs), t);
}

QuantMatrix quant_matrix(int quality) {
    check_quality(quality);
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    QuantMatrix qm;
    qm.quality = quality;
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) {
            int v = (scale * kBaseQuant[i][j] + 50) / 100;
            qm.entries[i][j] = std::max(v, 1);
        }
    }
    return qm;
}

QuantizedBlock quantize(const Block& coeffs, const QuantMatrix& qm) {
    QuantizedBlock out{};
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) {
            long long q = round_snapped(snap256(coeffs[i][j]), qm.entries[i][j]);
            out[i][j] = std::int16_t(std::clamp(q, -32767LL, 32767LL));
        }
    }
    return out;
}

Block dequantize(const QuantizedBlock& q, const QuantMatrix& qm) {
    Block out{};
    for (int i = 0; i < kDctSize; ++i) {
        for (int j = 0; j < kDctSize; ++j) {
            out[i][j] = double(q[i][j]) * qm.entries[i][j];
        }
    }
    return out;
}

CoefficientPlane analyze_frame(const FrameBuffer& frame, int quality) {
    frame.validate();
    check_quality(quality);

    CoefficientPlane plane;
    plane.original_width = frame.width;
    plane.original_height = frame.height;
    plane.padded_width = pad_up(frame.width, kTileSize);
    plane.padded_height = pad_up(frame.height, kTileSize);
    plane.channels = frame.channels;
    plane.coefficients.assign(plane.size(), 0);

    const QuantMatrix qm = quant_matrix(quality);
    for (std::uint32_t c = 0; c < frame.channels; ++c) {
        for (std::uint32_t by = 0; by < plane.padded_height; by += kDctSize) {
            for (std::uint32_t bx = 0; bx < plane.padded_width; bx += kDctSize) {
                Block values{};
                for (int i = 0; i < kDctSize; ++i) {
                    // Edge replication for samples beyond the original frame.
                    std::uint32_t y = std::min(by + i, frame.height - 1);
                    for (int j = 0; j < kDctSize; ++j) {
                        std::uint32_t x = std::min(bx + j, frame.width - 1);
                        values[i][j] = double(frame.at(c, y, x));
                    }
                }
                QuantizedBlock q = quantize(forward_dct(values), qm);
                for (int i = 0; i < kDctSize; ++i) {
                    for (int j = 0; j < kDctSize; ++j) {
                        plane.set(c, by + i, bx + j, q[i][j]);
                    }
                }
            }
        }
    }
    return plane;
}

FrameBuffer synthesize_frame(const CoefficientPlane& plane, int quality) {
    plane.validate();
    check_quality(quality);
    if (plane.original_width == 0 || plane.original_height == 0) {
        throw Error(Errc::GeometryError, "zero-size crop request");
    }

    const QuantMatrix qm = quant_matrix(quality);
    FrameBuffer out;
    out.width = plane.original_width;
    out.height = plane.original_height;
    out.channels = plane.channels;
    out.pixels.assign(out.size(), 0);

    for (std::uint32_t c = 0; c < plane.channels; ++c) {
        for (std::uint32_t by = 0; by < plane.padded_height; by += kDctSize) {
            if (by >= out.height) break;
            for (std::uint32_t bx = 0; bx < plane.padded_width; bx += kDctSize) {
                if (bx >= out.width) break;
                QuantizedBlock q{};
                for (int i = 0; i < kDctSize; ++i) {
                    for (int j = 0; j < kDctSize; ++j) {
                        q[i][j] = plane.at(c, by + i, bx + j);
                    }
                }
                Block values = inverse_dct(dequantize(q, qm));
                for (int i = 0; i < kDctSize && by + i < out.height; ++i) {
                    for (int j = 0; j < kDctSize && bx + j < out.width; ++j) {
                        long long v = round_snapped(snap256(values[i][j]), 1);
                        out.set(c, by + i, bx + j, std::uint8_t(std::clamp(v, 0LL, 255LL)));
                    }
                }
            }
        }
    }
    return out;
}

CoefficientPlane aes_coeff_layer(const CoefficientPlane& plane, const Key128& key,
                                 const Key128& nonce, CipherDirection) {
    plane.validate();
    if (is_zero_key(key)) throw Error(Errc::WeakKey, "all-zero AES key");

    detail::Aes128 aes(key);
    CoefficientPlane out = plane;
    for (std::uint32_t c = 0; c < plane.channels; ++c) {
        for (std::uint32_t by = 0; by < plane.padded_height / kDctSize; ++by) {
            for (std::uint32_t bx = 0; bx < plane.padded_width / kDctSize; ++bx) {
                // Serialize the 4x4 low-frequency corner into a 32-byte record.
                std::array<std::uint8_t, kRecordBytes> record{};
                std::size_t off = 0;
                for (int i = 0; i < kLowFreqEdge; ++i) {
                    for (int j = 0; j < kLowFreqEdge; ++j) {
                        auto v = std::uint16_t(out.at(c, by * kDctSize + i, bx * kDctSize + j));
                        record[off++] = std::uint8_t(v);
                        record[off++] = std::uint8_t(v >> 8);
                    }
                }
                auto ks0 = aes.encrypt_block(coeff_counter(nonce, c, by, bx, 0));
                auto ks1 = aes.encrypt_block(coeff_counter(nonce, c, by, bx, 1));
                for (int i = 0; i < 16; ++i) {
                    record[i] ^= ks0[i];
                    record[16 + i] ^= ks1[i];
                }
                off = 0;
                for (int i = 0; i < kLowFreqEdge; ++i) {
                    for (int j = 0; j < kLowFreqEdge; ++j) {
                        auto v = std::uint16_t(record[off] | (std::uint16_t(record[off + 1]) << 8));
                        off += 2;
                        out.set(c, by * kDctSize + i, bx * kDctSize + j, std::int16_t(v));
                    }
                }
            }
        }
    }
    return out;
}

Key128 frame_nonce(const DabKeyset& keys, std::uint64_t frame_index,
                   const CoefficientPlane& plane) {
    plane.validate();
    Sha256 h;
    h.update("sepris.dab.nonce");
    h.update_u64(keys.frame_nonce_base);
    h.update_u64(frame_index);
    Bytes buf;
    buf.reserve(plane.size() * 2);
    for (std::uint32_t c = 0; c < plane.channels; ++c) {
        for (std::uint32_t y = 0; y < plane.padded_height; ++y) {
            const bool low_row = (y % kDctSize) < kLowFreqEdge;
            for (std::uint32_t x = 0; x < plane.padded_width; ++x) {
                if (low_row && (x % kDctSize) < kLowFreqEdge) continue;  // encrypted slot
                auto v = std::uint16_t(plane.at(c, y, x));
                buf.push_back(std::uint8_t(v));
                buf.push_back(std::uint8_t(v >> 8));
            }
        }
    }
    h.update(buf);
    Hash256 digest = h.finish();
    Key128 nonce{};
    std::memcpy(nonce.data(), digest.data(), nonce.size());
    return nonce;
}

CipherFrame shuffle_blocks(const CoefficientPlane& plane, const Key128& seed,
                           std::uint64_t frame_index, int quality) {
    check_tile_grid(plane);
    check_quality(quality);

    const std::uint32_t grid_w = plane.padded_width / kTileSize;
    const std::uint32_t grid_h = plane.padded_height / kTileSize;
    const std::uint32_t count = grid_w * grid_h;
    auto perm = derive_permutation(seed, frame_index, count);

    CipherFrame cf;
    cf.quality = quality;
    cf.frame_index = frame_index;
    cf.permutation_digest = permutation_digest(perm, frame_index);
    cf.plane = plane;
    for (std::uint32_t t = 0; t < count; ++t) {
        copy_tile(plane, perm[t], cf.plane, t);
    }
    return cf;
}

CoefficientPlane unshuffle_blocks(const CipherFrame& cf, const Key128& seed) {
    check_tile_grid(cf.plane);

    const std::uint32_t grid_w = cf.plane.padded_width / kTileSize;
    const std::uint32_t grid_h = cf.plane.padded_height / kTileSize;
    const std::uint32_t count = grid_w * grid_h;
    auto perm = derive_permutation(seed, cf.frame_index, count);
    if (permutation_digest(perm, cf.frame_index) != cf.permutation_digest) {
        throw Error(Errc::WrongShuffleKey, "permutation digest mismatch");
    }

    CoefficientPlane out = cf.plane;
    for (std::uint32_t t = 0; t < count; ++t) {
        copy_tile(cf.plane, t, out, perm[t]);
    }
    return out;
}

CipherFrame encipher_frame(const FrameBuffer& frame, const DabKeyset& keys,
                           std::uint64_t frame_index) {
    check_quality(keys.quality);
    if (is_zero_key(keys.aes_key) || is_zero_key(keys.shuffle_seed)) {
        throw Error(Errc::WeakKey, "all-zero key material");
    }
    CoefficientPlane plane = analyze_frame(frame, keys.quality);
    Key128 nonce = frame_nonce(keys, frame_index, plane);
    plane = aes_coeff_layer(plane, keys.aes_key, nonce, CipherDirection::Encrypt);
    return shuffle_blocks(plane, keys.shuffle_seed, frame_index, keys.quality);
}

FrameBuffer decipher_frame(const CipherFrame& cf, const DabKeyset& keys) {
    if (is_zero_key(keys.aes_key) || is_zero_key(keys.shuffle_seed)) {
        throw Error(Errc::WeakKey, "all-zero key material");
    }
    CoefficientPlane plane = unshuffle_blocks(cf, keys.shuffle_seed);
    Key128 nonce = frame_nonce(keys, cf.frame_index, plane);
    plane = aes_coeff_layer(plane, keys.aes_key, nonce, CipherDirection::Decrypt);
    return synthesize_frame(plane, cf.quality);
}

FrameBuffer cipher_visualization(const CipherFrame& cf) {
    cf.plane.validate();
    FrameBuffer out;
    out.width = cf.plane.padded_width;
    out.height = cf.plane.padded_height;
    out.channels = cf.plane.channels;
    out.pixels.resize(out.size());
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = std::uint8_t(std::uint16_t(cf.plane.coefficients[i]) & 0xff);
    }
    return out;
}

FrameBuffer blind_decode(const CipherFrame& cf, Overflow mode) {
    cf.plane.validate();
    const QuantMatrix qm = quant_matrix(cf.quality);

    FrameBuffer out;
    out.width = cf.plane.padded_width;
    out.height = cf.plane.padded_height;
    out.channels = cf.plane.channels;
    out.pixels.assign(out.size(), 0);

    for (std::uint32_t c = 0; c < cf.plane.channels; ++c) {
        for (std::uint32_t by = 0; by < cf.plane.padded_height; by += kDctSize) {
            for (std::uint32_t bx = 0; bx < cf.plane.padded_width; bx += kDctSize) {
                QuantizedBlock q{};
                for (int i = 0; i < kDctSize; ++i) {
                    for (int j = 0; j < kDctSize; ++j) {
                        q[i][j] = cf.plane.at(c, by + i, bx + j);
                    }
                }
                Block values = inverse_dct(dequantize(q, qm));
                for (int i = 0; i < kDctSize; ++i) {
                    for (int j = 0; j < kDctSize; ++j) {
                        long long v = round_snapped(snap256(values[i][j]), 1);
                        std::uint8_t p = mode == Overflow::Wrap
                                             ? std::uint8_t(std::uint64_t(v) & 0xff)
                                             : std::uint8_t(std::clamp(v, 0LL, 255LL));
                        out.set(c, by + i, bx + j, p);
                    }
                }
            }
        }
    }
    return out;
}

Bytes serialize_cipher_frame(const CipherFrame& cf) {
    cf.plane.validate();
    check_quality(cf.quality);
    if (cf.plane.padded_width > 0xffff || cf.plane.padded_height > 0xffff) {
        throw Error(Errc::GeometryError, "dimensions exceed container limits");
    }

    Bytes out;
    out.reserve(4 + 2 * 5 + 2 + 8 + 32 + cf.plane.coefficients.size() * 2);
    out.insert(out.end(), {'S', 'P', 'R', 'C'});
    put_u16(out, 1);  // format version
    put_u16(out, std::uint16_t(cf.plane.original_width));
    put_u16(out, std::uint16_t(cf.plane.original_height));
    put_u16(out, std::uint16_t(cf.plane.padded_width));
    put_u16(out, std::uint16_t(cf.plane.padded_height));
    out.push_back(std::uint8_t(cf.plane.channels));
    out.push_back(std::uint8_t(cf.quality));
    put_u64(out, cf.frame_index);
    out.insert(out.end(), cf.permutation_digest.begin(), cf.permutation_digest.end());
    for (auto v : cf.plane.coefficients) {
        auto u = std::uint16_t(v);
        out.push_back(std::uint8_t(u));
        out.push_back(std::uint8_t(u >> 8));
    }
    return out;
}

CipherFrame parse_cipher_frame(BytesView data) {
    ByteReader r(data);
    auto magic = r.take(4);
    if (std::memcmp(magic.data(), "SPRC", 4) != 0) {
        throw Error(Errc::ParseError, "bad cipher frame magic");
    }
    if (r.u16() != 1) throw Error(Errc::ParseError, "unsupported cipher frame version");

    CipherFrame cf;
    cf.plane.original_width = r.u16();
    cf.plane.original_height = r.u16();
    cf.plane.padded_width = r.u16();
    cf.plane.padded_height = r.u16();
    cf.plane.channels = r.u8();
    cf.quality = r.u8();
    cf.frame_index = r.u64();
    auto digest = r.take(32);
    std::copy(digest.begin(), digest.end(), cf.permutation_digest.begin());

    if (cf.plane.padded_width == 0 || cf.plane.padded_height == 0 ||
        cf.plane.padded_width % kTileSize != 0 || cf.plane.padded_height % kTileSize != 0) {
        throw Error(Errc::ParseError, "bad padded dimensions");
    }
    if (cf.plane.channels != 1 && cf.plane.channels != 3) {
        throw Error(Errc::ParseError, "bad channel count");
    }
    if (cf.quality < 1 || cf.quality > 100) {
        throw Error(Errc::ParseError, "bad quality");
    }

    const std::size_t count = cf.plane.size();
    if (r.remaining() != count * 2) {
        throw Error(Errc::ParseError, "coefficient payload length mismatch");
    }
    cf.plane.coefficients.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        cf.plane.coefficients[i] = std::int16_t(r.u16());
    }
    return cf;
}

std::string keyset_to_json(const DabKeyset& keys) {
    return nlohmann::json{
        {"aes_key_hex", to_hex(BytesView(keys.aes_key.data(), keys.aes_key.size()))},
        {"shuffle_seed_hex", to_hex(BytesView(keys.shuffle_seed.data(), keys.shuffle_seed.size()))},
        {"quality", keys.quality},
        {"frame_nonce_base", keys.frame_nonce_base},
    }.dump();
}

DabKeyset keyset_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad keyset JSON: ") + e.what());
    }
    DabKeyset keys;
    try {
        Bytes aes = from_hex(j.at("aes_key_hex").get<std::string>());
        Bytes seed = from_hex(j.at("shuffle_seed_hex").get<std::string>());
        if (aes.size() != 16 || seed.size() != 16) {
            throw Error(Errc::ParseError, "keyset keys must be 16 bytes");
        }
        std::copy(aes.begin(), aes.end(), keys.aes_key.begin());
        std::copy(seed.begin(), seed.end(), keys.shuffle_seed.begin());
        keys.quality = j.at("quality").get<int>();
        keys.frame_nonce_base = j.at("frame_nonce_base").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("bad keyset JSON: ") + e.what());
    }
    return keys;
}

}  // namespace sepris::dab
