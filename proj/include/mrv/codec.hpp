// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mrv/error.hpp"
#include "mrv/image.hpp"

namespace mrv {

/// Frame compression selector. Lossless is a deflate-compressed raster in a
/// PNG container; Lossy is DCT-based (JPEG) with a quality knob.
struct CodecSpec {
  enum class Kind { Lossless, Lossy };
  Kind kind = Kind::Lossless;
  int quality = 0;  // 1..100, Lossy only

  static CodecSpec lossless() { return CodecSpec{Kind::Lossless, 0}; }
  static CodecSpec lossy(int quality) {
    if (quality < 1 || quality > 100)
      raise(Errc::ConfigInvalid, "lossy quality must be in 1..100");
    return CodecSpec{Kind::Lossy, quality};
  }
  bool is_lossless() const { return kind == Kind::Lossless; }
  bool operator==(const CodecSpec&) const = default;
};

namespace detail {

constexpr int kPngCompressionLevel = 3;

struct PngWriteCtx {
  std::vector<uint8_t>* out;
};

inline void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* ctx = static_cast<PngWriteCtx*>(png_get_io_ptr(png));
  ctx->out->insert(ctx->out->end(), data, data + len);
}
inline void png_flush_cb(png_structp) {}

struct PngReadCtx {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

inline void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + len > ctx->size) png_error(png, "read past end of stream");
  std::memcpy(out, ctx->data + ctx->pos, len);
  ctx->pos += len;
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  jmp_buf jump;
};

inline void jpeg_error_exit_cb(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  longjmp(mgr->jump, 1);
}

// gray8 (1 channel) or rgb8 (3 channels) PNG encode
inline std::vector<uint8_t> encode_png(const uint8_t* pixels, uint32_t w, uint32_t h,
                                       int channels) {
  std::vector<uint8_t> out;
  PngWriteCtx ctx{&out};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(Errc::IoFailure, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    raise(Errc::IoFailure, "png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(h);
  for (uint32_t y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(pixels + static_cast<size_t>(y) * w * channels);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(Errc::IoFailure, "png encode failed");
  }
  png_set_write_fn(png, &ctx, png_write_cb, png_flush_cb);
  png_set_compression_level(png, kPngCompressionLevel);
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct DecodedRaster {
  uint32_t w = 0, h = 0;
  int channels = 0;
  std::vector<uint8_t> data;
};

inline DecodedRaster decode_png(const uint8_t* bytes, size_t size, bool want_gray) {
  PngReadCtx ctx{bytes, size, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(Errc::IoFailure, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(Errc::IoFailure, "png_create_info_struct failed");
  }
  DecodedRaster out;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::CorruptStream, "malformed PNG stream");
  }
  png_set_read_fn(png, &ctx, png_read_cb);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (want_gray) {
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(png, 1, -1, -1);
  } else {
    if (!(color & PNG_COLOR_MASK_COLOR)) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  out.w = png_get_image_width(png, info);
  out.h = png_get_image_height(png, info);
  out.channels = want_gray ? 1 : 3;
  if (png_get_rowbytes(png, info) != static_cast<size_t>(out.w) * out.channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::CorruptStream, "unexpected PNG row layout");
  }
  out.data.resize(static_cast<size_t>(out.w) * out.h * out.channels);
  rows.resize(out.h);
  for (uint32_t y = 0; y < out.h; ++y)
    rows[y] = out.data.data() + static_cast<size_t>(y) * out.w * out.channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

inline std::vector<uint8_t> encode_jpeg(const Frame& frame, int quality) {
  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit_cb;

  unsigned char* buf = nullptr;
  unsigned long buf_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    if (buf) free(buf);
    raise(Errc::IoFailure, "jpeg encode failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buf, &buf_size);
  cinfo.image_width = frame.width();
  cinfo.image_height = frame.height();
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(frame.at(0, cinfo.next_scanline));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<uint8_t> out(buf, buf + buf_size);
  free(buf);
  return out;
}

inline Frame decode_jpeg(const uint8_t* bytes, size_t size) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit_cb;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    raise(Errc::CorruptStream, "malformed JPEG stream");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes, size);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  Frame out(cinfo.output_width, cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.at(0, cinfo.output_scanline);
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // libjpeg silently pads truncated streams; surface that as corruption
  bool corrupt = cinfo.err->num_warnings > 0;
  jpeg_destroy_decompress(&cinfo);
  if (corrupt) raise(Errc::CorruptStream, "truncated or corrupt JPEG stream");
  return out;
}

}  // namespace detail

inline std::vector<uint8_t> encode(const Frame& frame, const CodecSpec& codec) {
  if (codec.is_lossless())
    return detail::encode_png(frame.pixels().data(), frame.width(), frame.height(), 3);
  return detail::encode_jpeg(frame, codec.quality);
}

/// Container is detected from the stream signature, so decode accepts the
/// output of encode under either codec.
inline Frame decode(const std::vector<uint8_t>& bytes) {
  static const uint8_t png_sig[8] = {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0) {
    auto raster = detail::decode_png(bytes.data(), bytes.size(), /*want_gray=*/false);
    return Frame(raster.w, raster.h, std::move(raster.data));
  }
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    return detail::decode_jpeg(bytes.data(), bytes.size());
  }
  raise(Errc::CorruptStream, "unrecognized image stream signature");
}

/// Masks travel as single-channel PNG, 0 or 255.
inline std::vector<uint8_t> encode_mask_png(const Mask& mask) {
  std::vector<uint8_t> gray(mask.bits().size());
  for (size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits()[i] ? 255 : 0;
  return detail::encode_png(gray.data(), mask.width(), mask.height(), 1);
}

inline Mask decode_mask_png(const std::vector<uint8_t>& bytes) {
  auto raster = detail::decode_png(bytes.data(), bytes.size(), /*want_gray=*/true);
  Mask out(raster.w, raster.h);
  for (size_t i = 0; i < raster.data.size(); ++i) out.bits()[i] = raster.data[i] ? 1 : 0;
  return out;
}

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::MissingFile, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) raise(Errc::IoFailure, "read failed for " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(Errc::IoFailure, "write failed for " + path.string());
}

inline Frame load_frame(const std::filesystem::path& path) { return decode(read_file(path)); }
inline void save_frame_png(const std::filesystem::path& path, const Frame& f) {
  write_file(path, encode(f, CodecSpec::lossless()));
}
inline Mask load_mask(const std::filesystem::path& path) {
  return decode_mask_png(read_file(path));
}
inline void save_mask_png(const std::filesystem::path& path, const Mask& m) {
  write_file(path, encode_mask_png(m));
}

}  // namespace mrv
