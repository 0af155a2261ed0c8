#include "sepris/frame.hpp"

#include <fstream>

namespace sepris {

FrameBuffer::FrameBuffer(std::uint32_t w, std::uint32_t h, std::uint32_t c)
    : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c, 0) {
    validate();
}

void FrameBuffer::validate() const {
    if (width == 0 || height == 0) throw Error(Errc::GeometryError, "frame has zero dimension");
    if (channels != 1 && channels != 3)
        throw Error(Errc::GeometryError, "channel count must be 1 or 3");
    if (pixels.size() != size())
        throw Error(Errc::GeometryError, "pixel buffer length does not match dimensions");
}

namespace {

int next_pnm_token(std::istream& in) {
    // Skips whitespace and '#' comment lines, returns the next integer.
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    return value;
}

}  // namespace

FrameBuffer read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);

    std::string magic;
    in >> magic;
    std::uint32_t channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw Error(Errc::ParseError, path + ": not a binary PGM/PPM file");

    const int w = next_pnm_token(in);
    const int h = next_pnm_token(in);
    const int maxval = next_pnm_token(in);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw Error(Errc::ParseError, path + ": unsupported PNM geometry or depth");
    in.get();  // single whitespace separating header from raster

    FrameBuffer frame(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), channels);
    std::vector<char> raster(frame.size());
    in.read(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (in.gcount() != static_cast<std::streamsize>(raster.size()))
        throw Error(Errc::ParseError, path + ": truncated raster");

    if (channels == 1) {
        std::copy(raster.begin(), raster.end(), reinterpret_cast<char*>(frame.pixels.data()));
    } else {
        const std::size_t plane = frame.plane_size();
        for (std::size_t i = 0; i < plane; ++i)
            for (std::uint32_t c = 0; c < 3; ++c)
                frame.pixels[c * plane + i] = static_cast<std::uint8_t>(raster[i * 3 + c]);
    }
    return frame;
}

void write_pnm(const std::string& path, const FrameBuffer& frame) {
    frame.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path);

    out << (frame.channels == 1 ? "P5" : "P6") << "\n"
        << frame.width << " " << frame.height << "\n255\n";
    if (frame.channels == 1) {
        out.write(reinterpret_cast<const char*>(frame.pixels.data()),
                  static_cast<std::streamsize>(frame.pixels.size()));
    } else {
        const std::size_t plane = frame.plane_size();
        std::vector<char> raster(frame.size());
        for (std::size_t i = 0; i < plane; ++i)
            for (std::uint32_t c = 0; c < 3; ++c)
                raster[i * 3 + c] = static_cast<char>(frame.pixels[c * plane + i]);
        out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

}  // namespace sepris
