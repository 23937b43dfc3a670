#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "image.hpp"

namespace lectureseg {

inline bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

/// Decodes an 8-bit PNG or JPEG file; nullopt if it is not one or is unreadable.
inline std::optional<Raster> read_image(const std::filesystem::path& path) {
    if (!has_image_extension(path)) return std::nullopt;
    cv::Mat bgr;
    try {
        bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    } catch (const cv::Exception&) {
        return std::nullopt;
    }
    if (bgr.empty() || bgr.depth() != CV_8U) return std::nullopt;
    Raster out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) out.at(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
    }
    return out;
}

inline void write_png(const Raster& img, const std::filesystem::path& path) {
    cv::Mat bgr(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width(); ++x) {
            const Rgb p = img.at(x, y);
            row[x] = cv::Vec3b(p.b, p.g, p.r);
        }
    }
    if (!cv::imwrite(path.string(), bgr)) throw std::runtime_error("cannot write " + path.string());
}

/// 1-bit PNG, set pixels white.
inline void write_png(const BinaryRaster& mask, const std::filesystem::path& path) {
    cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
    }
    if (!cv::imwrite(path.string(), gray, {cv::IMWRITE_PNG_BILEVEL, 1}))
        throw std::runtime_error("cannot write " + path.string());
}

inline std::optional<BinaryRaster> read_mask(const std::filesystem::path& path) {
    auto img = read_image(path);
    if (!img) return std::nullopt;
    BinaryRaster out(img->width(), img->height());
    for (int y = 0; y < img->height(); ++y)
        for (int x = 0; x < img->width(); ++x) out.set(x, y, luma(img->at(x, y)) >= 128);
    return out;
}

}  // namespace lectureseg
