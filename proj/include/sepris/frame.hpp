#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepris/common.hpp"

namespace sepris {

// Raw pixel grid, row-major within each channel, channels stored planar
// (all of channel 0, then all of channel 1, ...).
struct FrameBuffer {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 1;
    std::vector<std::uint8_t> pixels;

    FrameBuffer() = default;
    FrameBuffer(std::uint32_t w, std::uint32_t h, std::uint32_t c);

    std::size_t plane_size() const { return std::size_t(width) * height; }
    std::size_t size() const { return plane_size() * channels; }

    std::uint8_t at(std::uint32_t c, std::uint32_t y, std::uint32_t x) const {
        return pixels[c * plane_size() + std::size_t(y) * width + x];
    }
    void set(std::uint32_t c, std::uint32_t y, std::uint32_t x, std::uint8_t v) {
        pixels[c * plane_size() + std::size_t(y) * width + x] = v;
    }

    // Throws GeometryError if dims/channel count/pixel length are inconsistent.
    void validate() const;

    bool operator==(const FrameBuffer&) const = default;
};

// Minimal uncompressed image I/O: binary PGM (P5) for single channel and
// PPM (P6) for three channels. PPM pixel data is interleaved on disk and
// converted to the planar layout in memory.
FrameBuffer read_pnm(const std::string& path);
void write_pnm(const std::string& path, const FrameBuffer& frame);

}  // namespace sepris
