#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include "sepris/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sepris/drbg.hpp"
#include "support.hpp"
#include "testutil.hpp"

using namespace sepris;
using testutil::error_code_of;

namespace {

dab::DabKeyset report_keys(std::uint64_t seed) {
    Drbg rng(seed);
    dab::DabKeyset keys;
    rng.fill(keys.aes_key.data(), keys.aes_key.size());
    rng.fill(keys.shuffle_seed.data(), keys.shuffle_seed.size());
    keys.quality = 50;
    keys.frame_nonce_base = rng.next_u64();
    return keys;
}

metrics::BitStream bits_of(const Bytes& bytes) {
    return metrics::BitStream::from_bytes(BytesView(bytes));
}

}  // namespace

TEST_CASE("bitstream extraction is MSB first") {
    const Bytes data = {0x81, 0x40};  // 10000001 01000000
    const metrics::BitStream bits = bits_of(data);
    REQUIRE(bits.size() == 16);
    const int expected[16] = {1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 16; ++i) CHECK(bits.bits[i] == expected[i]);
}

TEST_CASE("encryption quality counts differing positions") {
    const FrameBuffer a = testutil::make_test_image(64, 64, 1);
    CHECK(metrics::encryption_quality(a, a) == 0.0);

    FrameBuffer b = a;
    b.pixels[100] ^= 0xff;
    CHECK(metrics::encryption_quality(a, b) == doctest::Approx(1.0 / 4096.0));
    CHECK(metrics::encryption_quality(a, b) == metrics::encryption_quality(b, a));

    const FrameBuffer small = testutil::make_test_image(32, 32, 2);
    CHECK(error_code_of([&] { metrics::encryption_quality(a, small); }) ==
          Errc::DimensionMismatch);
}

TEST_CASE("monobit frequency test") {
    // Balanced stream: statistic is zero, p-value is one.
    const Bytes balanced(100, 0xAA);
    CHECK(metrics::monobit_frequency_test(bits_of(balanced)) == doctest::Approx(1.0));

    // Complementing the stream leaves |S| unchanged.
    const Bytes data = Drbg(7).bytes(512);
    Bytes complement = data;
    for (auto& b : complement) b = std::uint8_t(~b);
    CHECK(metrics::monobit_frequency_test(bits_of(data)) ==
          doctest::Approx(metrics::monobit_frequency_test(bits_of(complement))));

    const Bytes ones(13, 0xff);  // 104 bits, all one
    CHECK(metrics::monobit_frequency_test(bits_of(ones)) < 1e-15);

    const Bytes short_data(12, 0xAA);  // 96 bits: below the minimum
    CHECK(error_code_of([&] { metrics::monobit_frequency_test(bits_of(short_data)); }) ==
          Errc::TooFewBits);
}

TEST_CASE("runs test") {
    // Strict alternation has the maximum possible number of runs.
    const Bytes alternating(125, 0xAA);  // 1000 bits
    const metrics::RunsResult alt = metrics::runs_test(bits_of(alternating));
    REQUIRE(alt.applicable);
    CHECK(alt.p_value < 1e-10);

    // All ones fail the frequency precondition.
    const Bytes ones(125, 0xff);
    CHECK_FALSE(metrics::runs_test(bits_of(ones)).applicable);

    // Keystream-quality input passes nearly always.
    int passes = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const metrics::RunsResult r = metrics::runs_test(bits_of(Drbg(900 + trial).bytes(8192)));
        if (r.applicable && r.p_value > 0.01) ++passes;
    }
    CHECK(passes >= 98);
}

TEST_CASE("gap test") {
    // A constant stream degenerates: every gap is zero.
    const metrics::ChiSquareResult constant = metrics::gap_test(bits_of(Bytes(4096, 0x00)));
    CHECK(constant.p_value < 1e-12);
    CHECK_FALSE(constant.pass);

    const Bytes short_data(4095, 0x00);
    CHECK(error_code_of([&] { metrics::gap_test(bits_of(short_data)); }) == Errc::TooFewBits);

    int passes = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const metrics::ChiSquareResult r = metrics::gap_test(bits_of(Drbg(700 + trial).bytes(8192)));
        if (r.p_value > 0.01) ++passes;
    }
    CHECK(passes >= 98);
}

TEST_CASE("poker test") {
    // All sixteen nibble patterns equally frequent: statistic exactly zero.
    Bytes uniform;
    for (int rep = 0; rep < 320; ++rep) {
        for (std::uint8_t b : {0x01, 0x23, 0x45, 0x67, 0x89, 0xAB, 0xCD, 0xEF}) {
            uniform.push_back(b);
        }
    }
    const metrics::ChiSquareResult even = metrics::poker_test(bits_of(uniform));
    CHECK(even.statistic == doctest::Approx(0.0));
    CHECK(even.p_value == doctest::Approx(1.0));
    CHECK(even.pass);

    const metrics::ChiSquareResult degenerate = metrics::poker_test(bits_of(Bytes(2560, 0x00)));
    CHECK(degenerate.p_value < 1e-12);
    CHECK_FALSE(degenerate.pass);

    const Bytes short_data(2499, 0x5A);  // 19992 bits
    CHECK(error_code_of([&] { metrics::poker_test(bits_of(short_data)); }) == Errc::TooFewBits);
}

TEST_CASE("pixel change rate and average intensity difference") {
    const FrameBuffer a = testutil::make_test_image(64, 64, 11);
    CHECK(metrics::npcr(a, a) == 0.0);
    CHECK(metrics::uaci(a, a) == 0.0);

    FrameBuffer all0(64, 64, 1);
    FrameBuffer all255(64, 64, 1);
    std::fill(all255.pixels.begin(), all255.pixels.end(), std::uint8_t(255));
    CHECK(metrics::npcr(all0, all255) == doctest::Approx(100.0));
    CHECK(metrics::uaci(all0, all255) == doctest::Approx(100.0));

    FrameBuffer shifted = a;
    for (auto& p : shifted.pixels) p = std::uint8_t(p + 1);
    CHECK(metrics::npcr(a, shifted) == doctest::Approx(100.0));

    const FrameBuffer other = testutil::make_test_image(32, 64, 12);
    CHECK(error_code_of([&] { metrics::npcr(a, other); }) == Errc::DimensionMismatch);
    CHECK(error_code_of([&] { metrics::uaci(a, other); }) == Errc::DimensionMismatch);
}

TEST_CASE("peak signal-to-noise ratio") {
    const FrameBuffer a = testutil::make_test_image(64, 64, 21);
    CHECK(std::isinf(metrics::psnr(a, a)));

    FrameBuffer all0(64, 64, 1);
    FrameBuffer all255(64, 64, 1);
    std::fill(all255.pixels.begin(), all255.pixels.end(), std::uint8_t(255));
    CHECK(metrics::psnr(all0, all255) == doctest::Approx(0.0));

    const FrameBuffer other = testutil::make_test_image(32, 64, 22);
    CHECK(error_code_of([&] { metrics::psnr(a, other); }) == Errc::DimensionMismatch);
}

TEST_CASE("intensity entropy") {
    FrameBuffer constant(32, 32, 1);
    std::fill(constant.pixels.begin(), constant.pixels.end(), std::uint8_t(77));
    CHECK(metrics::entropy(constant) == doctest::Approx(0.0));

    FrameBuffer uniform(256, 256, 1);
    for (std::size_t i = 0; i < uniform.pixels.size(); ++i) {
        uniform.pixels[i] = std::uint8_t(i % 256);
    }
    CHECK(metrics::entropy(uniform) == doctest::Approx(8.0));

    // Entropy is a histogram property: permuting pixels changes nothing.
    FrameBuffer shuffled = uniform;
    Drbg rng(23);
    for (std::size_t i = shuffled.pixels.size(); i > 1; --i) {
        std::swap(shuffled.pixels[i - 1], shuffled.pixels[rng.uniform(i)]);
    }
    CHECK(metrics::entropy(shuffled) == doctest::Approx(metrics::entropy(uniform)));

    FrameBuffer empty;
    CHECK(error_code_of([&] { metrics::entropy(empty); }) == Errc::EmptyInput);
}

TEST_CASE("adjacent-pixel correlation") {
    const FrameBuffer natural = testutil::make_test_image(256, 256, 31);
    CHECK(metrics::correlation(natural, metrics::Direction::Horizontal, 4096, 1) > 0.8);
    CHECK(metrics::correlation(natural, metrics::Direction::Vertical, 4096, 2) > 0.8);
    CHECK(metrics::correlation(natural, metrics::Direction::Diagonal, 4096, 3) > 0.8);

    // Deterministic for a fixed seed.
    CHECK(metrics::correlation(natural, metrics::Direction::Horizontal, 4096, 1) ==
          metrics::correlation(natural, metrics::Direction::Horizontal, 4096, 1));

    FrameBuffer constant(32, 32, 1);
    std::fill(constant.pixels.begin(), constant.pixels.end(), std::uint8_t(5));
    CHECK(error_code_of([&] {
              metrics::correlation(constant, metrics::Direction::Horizontal, 4096, 1);
          }) == Errc::ZeroVariance);
}

TEST_CASE("full security report meets the published thresholds") {
    const FrameBuffer plain = testutil::make_test_image(512, 512, 7);
    const dab::DabKeyset keys = report_keys(99);

    const metrics::SecurityReport r = metrics::security_report(plain, keys);
    const metrics::Thresholds t;

    CHECK(r.encryption_quality >= t.min_encryption_quality);
    CHECK(r.frequency_p > t.min_test_p);
    CHECK(r.runs_applicable);
    CHECK(r.runs_p > t.min_test_p);
    CHECK(r.gap_p > t.min_test_p);
    CHECK(r.poker_p > t.min_test_p);
    CHECK(r.npcr_pixel_pct > t.min_npcr_pct);
    CHECK(r.uaci_pixel_pct > t.uaci_pixel_lo);
    CHECK(r.uaci_pixel_pct < t.uaci_pixel_hi);
    CHECK(r.npcr_key_pct > t.min_npcr_pct);
    CHECK(r.uaci_key_pct > t.uaci_key_lo);
    CHECK(r.uaci_key_pct < t.uaci_key_hi);
    CHECK(r.psnr_db < t.max_psnr_db);
    CHECK(r.entropy_bits >= t.min_entropy_bits);
    CHECK(std::abs(r.corr_horizontal) < t.max_abs_correlation);
    CHECK(std::abs(r.corr_vertical) < t.max_abs_correlation);
    CHECK(std::abs(r.corr_diagonal) < t.max_abs_correlation);
    CHECK(metrics::report_passes(r));

    // Identical inputs reproduce the identical report.
    const metrics::SecurityReport again = metrics::security_report(plain, keys);
    CHECK(metrics::report_to_json(again) == metrics::report_to_json(r));
}

TEST_CASE("identity codec stub is flagged") {
    const FrameBuffer plain = testutil::make_test_image(128, 128, 8);
    metrics::ReportOptions options;
    options.identity_codec = true;

    const metrics::SecurityReport r = metrics::security_report(plain, report_keys(9), options);
    CHECK(r.encryption_quality == 0.0);
    CHECK_FALSE(metrics::report_passes(r));
}

TEST_CASE("report serialization carries every statistic") {
    const FrameBuffer plain = testutil::make_test_image(128, 128, 41);
    const metrics::SecurityReport r = metrics::security_report(plain, report_keys(42));

    const nlohmann::json j = nlohmann::json::parse(metrics::report_to_json(r));
    CHECK(j.at("encryption_quality").get<double>() ==
          doctest::Approx(r.encryption_quality));
    CHECK(j.at("frequency_p").get<double>() == doctest::Approx(r.frequency_p));
    CHECK(j.at("npcr_pixel_pct").get<double>() == doctest::Approx(r.npcr_pixel_pct));
    CHECK(j.at("uaci_key_pct").get<double>() == doctest::Approx(r.uaci_key_pct));
    CHECK(j.at("psnr_db").get<double>() == doctest::Approx(r.psnr_db));
    CHECK(j.at("entropy_bits").get<double>() == doctest::Approx(r.entropy_bits));
    CHECK(j.at("corr_horizontal").get<double>() == doctest::Approx(r.corr_horizontal));

    const std::string table = metrics::report_to_table(r);
    CHECK(table.find("Encryption quality") != std::string::npos);
    CHECK(table.find("Entropy") != std::string::npos);
    CHECK(table.find("PSNR") != std::string::npos);
}

TEST_CASE("threshold evaluation rejects out-of-band reports") {
    const FrameBuffer plain = testutil::make_test_image(128, 128, 51);
    metrics::SecurityReport r = metrics::security_report(plain, report_keys(52));
    REQUIRE(metrics::report_passes(r));

    metrics::SecurityReport bad = r;
    bad.entropy_bits = 6.0;
    CHECK_FALSE(metrics::report_passes(bad));

    bad = r;
    bad.npcr_key_pct = 42.0;
    CHECK_FALSE(metrics::report_passes(bad));

    bad = r;
    bad.corr_diagonal = 0.5;
    CHECK_FALSE(metrics::report_passes(bad));

    bad = r;
    bad.psnr_db = 35.0;
    CHECK_FALSE(metrics::report_passes(bad));
}
