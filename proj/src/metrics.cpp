#include "sepris/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "sepris/common.hpp"
#include "sepris/drbg.hpp"

namespace sepris::metrics {

namespace {

void check_same_shape(const FrameBuffer& a, const FrameBuffer& b) {
    a.validate();
    b.validate();
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw Error(Errc::DimensionMismatch, "frame shapes differ");
    }
}

double chi_square_p(double statistic, double dof) {
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

std::vector<std::uint8_t> pack_bytes(const BitStream& bits) {
    std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::uint8_t v = 0;
        for (int b = 0; b < 8; ++b) v = std::uint8_t((v << 1) | bits.bits[i * 8 + b]);
        bytes[i] = v;
    }
    return bytes;
}

// Crop the padded decode back to the reference shape for plain/cipher
// comparisons.
FrameBuffer crop_to(const FrameBuffer& src, const FrameBuffer& shape) {
    if (src.width == shape.width && src.height == shape.height) return src;
    FrameBuffer out(shape.width, shape.height, src.channels);
    for (std::uint32_t c = 0; c < src.channels; ++c) {
        for (std::uint32_t y = 0; y < shape.height; ++y) {
            for (std::uint32_t x = 0; x < shape.width; ++x) {
                out.set(c, y, x, src.at(c, y, x));
            }
        }
    }
    return out;
}

}  // namespace

BitStream BitStream::from_bytes(BytesView data) {
    BitStream out;
    out.bits.reserve(data.size() * 8);
    for (std::uint8_t byte : data) {
        for (int b = 7; b >= 0; --b) out.bits.push_back((byte >> b) & 1u);
    }
    return out;
}

double encryption_quality(const FrameBuffer& plain, const FrameBuffer& cipher) {
    check_same_shape(plain, cipher);
    std::size_t same = 0;
    for (std::size_t i = 0; i < plain.pixels.size(); ++i) {
        same += plain.pixels[i] == cipher.pixels[i];
    }
    return 1.0 - double(same) / double(plain.pixels.size());
}

double monobit_frequency_test(const BitStream& bits) {
    const std::size_t n = bits.size();
    if (n < 100) throw Error(Errc::TooFewBits, "monobit test needs at least 100 bits");
    long long s = 0;
    for (auto b : bits.bits) s += b ? 1 : -1;
    const double s_obs = std::abs(double(s)) / std::sqrt(double(n));
    return std::erfc(s_obs / std::numbers::sqrt2);
}

RunsResult runs_test(const BitStream& bits) {
    const std::size_t n = bits.size();
    if (n < 100) throw Error(Errc::TooFewBits, "runs test needs at least 100 bits");
    std::size_t ones = 0;
    for (auto b : bits.bits) ones += b;
    const double pi = double(ones) / double(n);
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(double(n))) {
        return {false, 0.0};
    }
    std::size_t v = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) v += bits.bits[i] != bits.bits[i + 1];
    const double num = std::abs(double(v) - 2.0 * double(n) * pi * (1.0 - pi));
    const double den = 2.0 * std::sqrt(2.0 * double(n)) * pi * (1.0 - pi);
    return {true, std::erfc(num / den)};
}

ChiSquareResult gap_test(const BitStream& bits) {
    const std::size_t byte_count = bits.size() / 8;
    if (byte_count < 4096) throw Error(Errc::TooFewBits, "gap test needs at least 4096 bytes");
    auto bytes = pack_bytes(bits);

    // Gap lengths between successive bytes in the target range [0, 128).
    constexpr int kBins = 10;  // lengths 0..9, plus one overflow cell
    std::array<double, kBins + 1> observed{};
    std::size_t total = 0;
    bool started = false;
    std::size_t gap = 0;
    for (auto byte : bytes) {
        if (byte < 128) {
            if (started) {
                observed[std::min<std::size_t>(gap, kBins)] += 1.0;
                ++total;
            }
            started = true;
            gap = 0;
        } else if (started) {
            ++gap;
        }
    }
    if (total < 64) {
        return {0.0, 0.0, false};  // degenerate stream: too few gaps to test
    }

    double statistic = 0.0;
    for (int k = 0; k <= kBins; ++k) {
        const double p = k < kBins ? std::pow(0.5, k + 1) : std::pow(0.5, kBins);
        const double expected = p * double(total);
        const double d = observed[k] - expected;
        statistic += d * d / expected;
    }
    const double p_value = chi_square_p(statistic, kBins);
    return {statistic, p_value, p_value > 0.05};
}

ChiSquareResult poker_test(const BitStream& bits) {
    const std::size_t n = bits.size();
    if (n < 20000) throw Error(Errc::TooFewBits, "poker test needs at least 20000 bits");
    const std::size_t k = n / 4;
    std::array<double, 16> freq{};
    for (std::size_t i = 0; i < k; ++i) {
        std::uint8_t v = 0;
        for (int b = 0; b < 4; ++b) v = std::uint8_t((v << 1) | bits.bits[i * 4 + b]);
        freq[v] += 1.0;
    }
    double sum_sq = 0.0;
    for (double f : freq) sum_sq += f * f;
    const double statistic = 16.0 / double(k) * sum_sq - double(k);
    const double p_value = chi_square_p(statistic, 15.0);
    return {statistic, p_value, p_value > 0.05};
}

double npcr(const FrameBuffer& a, const FrameBuffer& b) {
    check_same_shape(a, b);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) diff += a.pixels[i] != b.pixels[i];
    return 100.0 * double(diff) / double(a.pixels.size());
}

double uaci(const FrameBuffer& a, const FrameBuffer& b) {
    check_same_shape(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        acc += std::abs(int(a.pixels[i]) - int(b.pixels[i]));
    }
    return 100.0 * acc / (255.0 * double(a.pixels.size()));
}

double psnr(const FrameBuffer& reference, const FrameBuffer& test) {
    check_same_shape(reference, test);
    double mse = 0.0;
    for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
        const double d = double(reference.pixels[i]) - double(test.pixels[i]);
        mse += d * d;
    }
    mse /= double(reference.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double entropy(const FrameBuffer& img) {
    if (img.pixels.empty()) throw Error(Errc::EmptyInput, "entropy of empty frame");
    img.validate();
    std::array<double, 256> hist{};
    for (auto p : img.pixels) hist[p] += 1.0;
    const double n = double(img.pixels.size());
    double h = 0.0;
    for (double count : hist) {
        if (count == 0.0) continue;
        const double p = count / n;
        h -= p * std::log2(p);
    }
    return h;
}

double correlation(const FrameBuffer& img, Direction dir, std::size_t samples,
                   std::uint64_t seed) {
    img.validate();
    if (img.width < 2 || img.height < 2) {
        throw Error(Errc::GeometryError, "correlation needs at least a 2x2 frame");
    }
    if (samples == 0) throw Error(Errc::EmptyInput, "correlation needs samples");

    const std::uint32_t dx = dir != Direction::Vertical ? 1 : 0;
    const std::uint32_t dy = dir != Direction::Horizontal ? 1 : 0;
    Drbg rng(seed);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto c = std::uint32_t(rng.uniform(img.channels));
        const auto y = std::uint32_t(rng.uniform(img.height - dy));
        const auto x = std::uint32_t(rng.uniform(img.width - dx));
        const double a = img.at(c, y, x);
        const double b = img.at(c, y + dy, x + dx);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    const double n = double(samples);
    const double var_a = sxx - sx * sx / n;
    const double var_b = syy - sy * sy / n;
    if (var_a <= 0.0 || var_b <= 0.0) {
        throw Error(Errc::ZeroVariance, "constant sample set");
    }
    return (sxy - sx * sy / n) / std::sqrt(var_a * var_b);
}

bool report_passes(const SecurityReport& r, const Thresholds& t) {
    const bool tests_ok = r.frequency_p > t.min_test_p && r.runs_applicable &&
                          r.runs_p > t.min_test_p && r.gap_p > t.min_test_p && r.gap_pass &&
                          r.poker_p > t.min_test_p && r.poker_pass;
    const bool sensitivity_ok =
        r.npcr_pixel_pct > t.min_npcr_pct && r.npcr_key_pct > t.min_npcr_pct &&
        r.uaci_pixel_pct >= t.uaci_pixel_lo && r.uaci_pixel_pct <= t.uaci_pixel_hi &&
        r.uaci_key_pct >= t.uaci_key_lo && r.uaci_key_pct <= t.uaci_key_hi;
    const bool corr_ok = std::abs(r.corr_horizontal) < t.max_abs_correlation &&
                         std::abs(r.corr_vertical) < t.max_abs_correlation &&
                         std::abs(r.corr_diagonal) < t.max_abs_correlation;
    return r.encryption_quality >= t.min_encryption_quality && tests_ok && sensitivity_ok &&
           r.psnr_db < t.max_psnr_db && r.entropy_bits >= t.min_entropy_bits && corr_ok;
}

SecurityReport security_report(const FrameBuffer& plain, const dab::DabKeyset& keys,
                               const ReportOptions& options) {
    plain.validate();

    // The battery looks at two decoder views of the same cipher frame: the
    // saturating display view (visual concealment, compared against the
    // plain frame) and the wrapping arithmetic view, which preserves the
    // full overflow noise of the garbled coefficients and is the right
    // object for the statistical and sensitivity measurements.
    auto display_view = [&](const FrameBuffer& f, std::uint64_t idx) {
        if (options.identity_codec) return f;
        return dab::blind_decode(dab::encipher_frame(f, keys, idx), dab::Overflow::Clamp);
    };
    auto noise_view = [&](const FrameBuffer& f, const dab::DabKeyset& k, std::uint64_t idx) {
        if (options.identity_codec) return f;
        return dab::blind_decode(dab::encipher_frame(f, k, idx), dab::Overflow::Wrap);
    };

    SecurityReport r;
    const FrameBuffer display = display_view(plain, options.frame_index);
    const FrameBuffer noise = noise_view(plain, keys, options.frame_index);

    r.encryption_quality = encryption_quality(plain, crop_to(display, plain));

    const BitStream bits = BitStream::from_bytes(noise.pixels);
    r.frequency_p = monobit_frequency_test(bits);
    const RunsResult runs = runs_test(bits);
    r.runs_applicable = runs.applicable;
    r.runs_p = runs.p_value;
    const ChiSquareResult gap = gap_test(bits);
    r.gap_p = gap.p_value;
    r.gap_pass = gap.pass;
    const ChiSquareResult poker = poker_test(bits);
    r.poker_p = poker.p_value;
    r.poker_pass = poker.pass;

    // Pixel sensitivity: flip the top bit of the centre pixel. The top bit
    // is guaranteed to survive quantization, so the cipher frame re-keys.
    FrameBuffer perturbed = plain;
    const std::uint32_t cy = plain.height / 2;
    const std::uint32_t cx = plain.width / 2;
    perturbed.set(0, cy, cx, perturbed.at(0, cy, cx) ^ 0x80);
    const FrameBuffer noise_pixel = noise_view(perturbed, keys, options.frame_index);
    r.npcr_pixel_pct = npcr(noise, noise_pixel);
    r.uaci_pixel_pct = uaci(noise, noise_pixel);

    // Key sensitivity: flip the least significant bit of the AES key.
    dab::DabKeyset nudged = keys;
    nudged.aes_key[15] ^= 0x01;
    const FrameBuffer noise_key = noise_view(plain, nudged, options.frame_index);
    r.npcr_key_pct = npcr(noise, noise_key);
    r.uaci_key_pct = uaci(noise, noise_key);

    r.psnr_db = psnr(plain, crop_to(noise, plain));
    r.entropy_bits = entropy(noise);

    r.corr_horizontal =
        correlation(noise, Direction::Horizontal, options.correlation_samples,
                    options.correlation_seed);
    r.corr_vertical = correlation(noise, Direction::Vertical, options.correlation_samples,
                                  options.correlation_seed + 1);
    r.corr_diagonal = correlation(noise, Direction::Diagonal, options.correlation_samples,
                                  options.correlation_seed + 2);
    return r;
}

std::string report_to_json(const SecurityReport& r) {
    nlohmann::json j{
        {"encryption_quality", r.encryption_quality},
        {"frequency_p", r.frequency_p},
        {"runs_applicable", r.runs_applicable},
        {"runs_p", r.runs_p},
        {"gap_p", r.gap_p},
        {"gap_pass", r.gap_pass},
        {"poker_p", r.poker_p},
        {"poker_pass", r.poker_pass},
        {"npcr_pixel_pct", r.npcr_pixel_pct},
        {"uaci_pixel_pct", r.uaci_pixel_pct},
        {"npcr_key_pct", r.npcr_key_pct},
        {"uaci_key_pct", r.uaci_key_pct},
        {"psnr_db", std::isinf(r.psnr_db) ? "Infinite" : nlohmann::json(r.psnr_db)},
        {"entropy_bits", r.entropy_bits},
        {"corr_horizontal", r.corr_horizontal},
        {"corr_vertical", r.corr_vertical},
        {"corr_diagonal", r.corr_diagonal},
        {"pass", report_passes(r)},
    };
    return j.dump(2);
}

std::string report_to_table(const SecurityReport& r) {
    std::ostringstream os;
    auto row = [&os](const std::string& name, const std::string& value) {
        os << "  " << name;
        for (std::size_t i = name.size(); i < 34; ++i) os << ' ';
        os << value << "\n";
    };
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(5);
        s << v;
        return s.str();
    };
    os << "Security analysis\n";
    row("Encryption quality", num(100.0 * r.encryption_quality) + " %");
    row("Frequency (monobit) p", num(r.frequency_p));
    row("Runs p", r.runs_applicable ? num(r.runs_p) : std::string("not applicable"));
    row("Gap p", num(r.gap_p) + (r.gap_pass ? "  (passed)" : "  (failed)"));
    row("Poker p", num(r.poker_p) + (r.poker_pass ? "  (passed)" : "  (failed)"));
    row("NPCR (pixel sensitivity)", num(r.npcr_pixel_pct) + " %");
    row("UACI (pixel sensitivity)", num(r.uaci_pixel_pct) + " %");
    row("NPCR (key sensitivity)", num(r.npcr_key_pct) + " %");
    row("UACI (key sensitivity)", num(r.uaci_key_pct) + " %");
    row("PSNR", std::isinf(r.psnr_db) ? std::string("Infinite") : num(r.psnr_db) + " dB");
    row("Entropy", num(r.entropy_bits) + " bits");
    row("Correlation (horizontal)", num(r.corr_horizontal));
    row("Correlation (vertical)", num(r.corr_vertical));
    row("Correlation (diagonal)", num(r.corr_diagonal));
    row("Overall", report_passes(r) ? "PASS" : "FAIL");
    return os.str();
}

}  // namespace sepris::metrics
