#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepris/dab.hpp"
#include "sepris/frame.hpp"

namespace sepris::metrics {

// Unpacked bit sequence (one byte per bit, MSB-first within source bytes).
struct BitStream {
    std::vector<std::uint8_t> bits;

    static BitStream from_bytes(BytesView data);
    std::size_t size() const { return bits.size(); }
};

// Fraction of positions where the two frames differ (Eq. style: 1 - matches/n).
double encryption_quality(const FrameBuffer& plain, const FrameBuffer& cipher);

// NIST-style monobit frequency test p-value. Requires at least 100 bits.
double monobit_frequency_test(const BitStream& bits);

struct RunsResult {
    bool applicable = false;  // false when the frequency precondition fails
    double p_value = 0.0;
};

RunsResult runs_test(const BitStream& bits);

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false;  // p > 0.05
};

// Knuth gap test over the byte view of the stream, target range [0,128),
// gap lengths binned 0..9 plus overflow. Requires at least 4096 bytes.
ChiSquareResult gap_test(const BitStream& bits);

// Poker test over consecutive 4-bit groups (16 cells, 15 degrees of
// freedom). Requires at least 20000 bits.
ChiSquareResult poker_test(const BitStream& bits);

// Pixel change rate and average intensity difference, both in percent.
double npcr(const FrameBuffer& a, const FrameBuffer& b);
double uaci(const FrameBuffer& a, const FrameBuffer& b);

// Peak signal-to-noise ratio in dB; +infinity when the frames are identical.
double psnr(const FrameBuffer& reference, const FrameBuffer& test);

// Shannon entropy of the intensity histogram, in bits per symbol.
double entropy(const FrameBuffer& img);

enum class Direction { Horizontal, Vertical, Diagonal };

// Pearson correlation of randomly sampled adjacent pixel pairs.
double correlation(const FrameBuffer& img, Direction dir, std::size_t samples,
                   std::uint64_t seed);

struct SecurityReport {
    double encryption_quality = 0.0;
    double frequency_p = 0.0;
    bool runs_applicable = false;
    double runs_p = 0.0;
    double gap_p = 0.0;
    bool gap_pass = false;
    double poker_p = 0.0;
    bool poker_pass = false;
    double npcr_pixel_pct = 0.0;
    double uaci_pixel_pct = 0.0;
    double npcr_key_pct = 0.0;
    double uaci_key_pct = 0.0;
    double psnr_db = 0.0;
    double entropy_bits = 0.0;
    double corr_horizontal = 0.0;
    double corr_vertical = 0.0;
    double corr_diagonal = 0.0;
};

// Acceptance thresholds for a report; defaults pin the published targets.
struct Thresholds {
    double min_encryption_quality = 0.999;
    double min_test_p = 0.05;
    double min_npcr_pct = 99.0;
    double uaci_pixel_lo = 32.3, uaci_pixel_hi = 34.3;
    double uaci_key_lo = 32.5, uaci_key_hi = 34.5;
    double max_psnr_db = 20.0;
    double min_entropy_bits = 7.9;
    double max_abs_correlation = 0.02;
};

bool report_passes(const SecurityReport& report, const Thresholds& t = {});

struct ReportOptions {
    std::uint64_t frame_index = 0;
    std::size_t correlation_samples = 65536;
    std::uint64_t correlation_seed = 20210309;
    bool identity_codec = false;  // test hook: bypass the cipher entirely
};

// Full battery over one frame/keyset pair. Deterministic for fixed inputs.
SecurityReport security_report(const FrameBuffer& plain, const dab::DabKeyset& keys,
                               const ReportOptions& options = {});

std::string report_to_json(const SecurityReport& report);
std::string report_to_table(const SecurityReport& report);

}  // namespace sepris::metrics
