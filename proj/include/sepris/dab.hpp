#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "sepris/frame.hpp"
#include "sepris/hash.hpp"

namespace sepris::dab {

inline constexpr int kDctSize = 8;        // transform block edge
inline constexpr int kTileSize = 32;      // shuffle tile edge
inline constexpr int kLowFreqEdge = 4;    // encrypted low-frequency region per block
inline constexpr int kRecordBytes = 32;   // 16 coefficients x 2 bytes

using Block = std::array<std::array<double, kDctSize>, kDctSize>;
using QuantizedBlock = std::array<std::array<std::int16_t, kDctSize>, kDctSize>;
using Key128 = std::array<std::uint8_t, 16>;

// Orthonormal 8x8 transform matrix. Row 0 is the constant 1/sqrt(8) row so
// that the inverse is the transpose.
struct DctMatrix {
    std::array<std::array<double, kDctSize>, kDctSize> entries;
};

DctMatrix dct_matrix();

// T * M * T' and its inverse T' * D * T.
Block forward_dct(const Block& values);
Block inverse_dct(const Block& coeffs);

struct QuantMatrix {
    int quality = 50;
    std::array<std::array<int, kDctSize>, kDctSize> entries;
};

// Quality-scaled quantization matrix derived from the base luminance table.
// Entries are clamped to a minimum of 1 (quality 100 would otherwise produce
// zero divisors). Throws InvalidQuality outside [1, 100].
QuantMatrix quant_matrix(int quality);

// Round to nearest, ties away from zero, saturated to the int16 range.
QuantizedBlock quantize(const Block& coeffs, const QuantMatrix& qm);
Block dequantize(const QuantizedBlock& q, const QuantMatrix& qm);

// Quantized transform plane. Padded dims are multiples of the tile size;
// the original dims are carried for the final crop.
struct CoefficientPlane {
    std::uint32_t padded_width = 0;
    std::uint32_t padded_height = 0;
    std::uint32_t original_width = 0;
    std::uint32_t original_height = 0;
    std::uint32_t channels = 1;
    std::vector<std::int16_t> coefficients;  // channel-planar, row-major

    std::size_t plane_size() const { return std::size_t(padded_width) * padded_height; }
    std::size_t size() const { return plane_size() * channels; }

    std::int16_t at(std::uint32_t c, std::uint32_t y, std::uint32_t x) const {
        return coefficients[c * plane_size() + std::size_t(y) * padded_width + x];
    }
    void set(std::uint32_t c, std::uint32_t y, std::uint32_t x, std::int16_t v) {
        coefficients[c * plane_size() + std::size_t(y) * padded_width + x] = v;
    }

    void validate() const;

    bool operator==(const CoefficientPlane&) const = default;
};

struct DabKeyset {
    Key128 aes_key{};
    Key128 shuffle_seed{};
    int quality = 50;
    std::uint64_t frame_nonce_base = 0;

    bool operator==(const DabKeyset&) const = default;
};

std::string keyset_to_json(const DabKeyset& keys);
DabKeyset keyset_from_json(const std::string& text);

struct CipherFrame {
    CoefficientPlane plane;
    int quality = 50;
    std::uint64_t frame_index = 0;
    Hash256 permutation_digest{};

    bool operator==(const CipherFrame&) const = default;
};

enum class CipherDirection { Encrypt, Decrypt };

// Pad (edge replication), block-transform and quantize one frame.
CoefficientPlane analyze_frame(const FrameBuffer& frame, int quality);

// Dequantize, inverse-transform, clamp to [0,255] and crop back to the
// original dims.
FrameBuffer synthesize_frame(const CoefficientPlane& plane, int quality);

// Keystream XOR over the 16 low-frequency coefficients of every 8x8 block.
// Each coefficient occupies a fixed 2-byte slot of a 32-byte block record,
// and the keystream block is bound to (nonce, channel, block row, block
// column, record half), so the layer is positional and self-inverse.
CoefficientPlane aes_coeff_layer(const CoefficientPlane& plane, const Key128& key,
                                 const Key128& nonce, CipherDirection direction);

// Frame nonce for the coefficient layer: binds the keyset counter origin,
// the frame ordinal and the unencrypted (high-frequency) coefficient
// content, so any visible plaintext change reissues every keystream block.
// The decoder recomputes it from the unshuffled plane before decrypting.
Key128 frame_nonce(const DabKeyset& keys, std::uint64_t frame_index,
                   const CoefficientPlane& plane);

// Keyed Fisher-Yates permutation of the 32x32 tile grid, identical across
// channels. The permutation is derived from (seed, frame_index) alone.
CipherFrame shuffle_blocks(const CoefficientPlane& plane, const Key128& seed,
                           std::uint64_t frame_index, int quality);

// Inverse permutation; throws WrongShuffleKey when the permutation derived
// from (seed, frame_index) does not match the recorded digest.
CoefficientPlane unshuffle_blocks(const CipherFrame& cf, const Key128& seed);

CipherFrame encipher_frame(const FrameBuffer& frame, const DabKeyset& keys,
                           std::uint64_t frame_index);
FrameBuffer decipher_frame(const CipherFrame& cf, const DabKeyset& keys);

// Low byte of every coefficient as an 8-bit image (padded dims).
FrameBuffer cipher_visualization(const CipherFrame& cf);

// What a decoder without keys renders: dequantize + inverse transform of
// the garbled plane. Wrap keeps the full overflow noise (used by the
// statistical battery); Clamp saturates like a display pipeline.
enum class Overflow { Wrap, Clamp };
FrameBuffer blind_decode(const CipherFrame& cf, Overflow mode);

// "SPRC" cipher-frame container (fixed little-endian layout).
Bytes serialize_cipher_frame(const CipherFrame& cf);
CipherFrame parse_cipher_frame(BytesView data);

}  // namespace sepris::dab
