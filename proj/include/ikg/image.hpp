#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ikg/errors.hpp"

namespace ikg {

// Minimal raster image support. The pipeline only needs decode + fixed-size
// resize + re-encode before attaching the image to a chat turn; binary PPM
// (P6, and P5 grayscale widened to RGB) keeps that fully deterministic.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // width * height * 3

    static Image decode(const std::vector<uint8_t>& bytes);
    static Image load_file(const std::string& path);

    Image resized(int w, int h) const;
    std::vector<uint8_t> encode_ppm() const;
};

inline Image Image::decode(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ImageDecodeError("not a binary PPM/PGM (P5/P6) image");
    }
    const bool gray = bytes[1] == '5';
    size_t pos = 2;
    auto next_int = [&]() -> int {
        // skip whitespace and '#' comment lines
        while (pos < bytes.size()) {
            uint8_t c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
        int v = 0;
        bool any = false;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            any = true;
            ++pos;
        }
        if (!any) throw ImageDecodeError("truncated PPM header");
        return v;
    };
    Image img;
    img.width = next_int();
    img.height = next_int();
    int maxval = next_int();
    if (img.width <= 0 || img.height <= 0 || maxval != 255) {
        throw ImageDecodeError("unsupported PPM dimensions or maxval");
    }
    ++pos;  // single whitespace after maxval
    size_t npix = static_cast<size_t>(img.width) * img.height;
    size_t need = npix * (gray ? 1 : 3);
    if (bytes.size() - pos < need) throw ImageDecodeError("truncated PPM pixel data");
    img.rgb.resize(npix * 3);
    if (gray) {
        for (size_t i = 0; i < npix; ++i) {
            uint8_t v = bytes[pos + i];
            img.rgb[i * 3] = img.rgb[i * 3 + 1] = img.rgb[i * 3 + 2] = v;
        }
    } else {
        std::copy(bytes.begin() + pos, bytes.begin() + pos + need, img.rgb.begin());
    }
    return img;
}

inline Image Image::load_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ImageDecodeError("cannot open image file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return decode(bytes);
}

inline Image Image::resized(int w, int h) const {
    Image out;
    out.width = w;
    out.height = h;
    out.rgb.resize(static_cast<size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        int sy = static_cast<int>(static_cast<int64_t>(y) * height / h);
        for (int x = 0; x < w; ++x) {
            int sx = static_cast<int>(static_cast<int64_t>(x) * width / w);
            size_t src = (static_cast<size_t>(sy) * width + sx) * 3;
            size_t dst = (static_cast<size_t>(y) * w + x) * 3;
            out.rgb[dst] = rgb[src];
            out.rgb[dst + 1] = rgb[src + 1];
            out.rgb[dst + 2] = rgb[src + 2];
        }
    }
    return out;
}

inline std::vector<uint8_t> Image::encode_ppm() const {
    std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

}  // namespace ikg
