#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "byte_io.hpp"
#include "dragonfly/error.hpp"
#include "dragonfly/imaging.hpp"

namespace dragonfly {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && std::memcmp(b.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, "png: " + msg);
  }
  // Read as RGBA (gray is replicated by libpng), then discard alpha without
  // compositing so color values are untouched.
  image.format = PNG_FORMAT_RGBA;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, "png: empty image");
  }
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, "png: " + msg);
  }
  const std::size_t n = std::size_t{image.width} * image.height;
  std::vector<std::uint8_t> data(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    data[i * 3] = rgba[i * 4];
    data[i * 3 + 1] = rgba[i * 4 + 1];
    data[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return ImageBuffer(image.width, image.height, std::move(data));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

[[noreturn]] void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// libjpeg reports truncated or corrupt data as warnings and pads the output;
// treat every warning as fatal.
void jpeg_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_fail(cinfo);
}

// Plain C-style routine: no objects with destructors live across setjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& out,
                     std::uint32_t& width, std::uint32_t& height, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_fail;
  jerr.base.emit_message = jpeg_message;
  jerr.message[0] = '\0';

  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    error = jerr.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;  // libjpeg replicates grayscale
  jpeg_start_decompress(&cinfo);
  if (cinfo.output_components != 3) {
    jpeg_destroy_decompress(&cinfo);
    error = "unsupported component count";
    return false;
  }
  width = cinfo.output_width;
  height = cinfo.output_height;
  out.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> data;
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  std::string error;
  if (!decode_jpeg_raw(bytes, data, w, h, error)) throw Error(ErrorCode::DecodeError, "jpeg: " + error);
  return ImageBuffer(w, h, std::move(data));
}

ImageBuffer decode_dfim(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::DecodeError);
  r.expect_magic("DFIM");
  const std::uint32_t w = r.u32();
  const std::uint32_t h = r.u32();
  if (w == 0 || h == 0) throw Error(ErrorCode::DecodeError, "dfim: zero dimension");
  const std::uint64_t n = std::uint64_t{w} * h * 3;
  if (r.remaining() != n) throw Error(ErrorCode::DecodeError, "dfim: payload size mismatch");
  auto px = r.take(static_cast<std::size_t>(n));
  return ImageBuffer(w, h, std::vector<std::uint8_t>(px.begin(), px.end()));
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "DFIM", 4) == 0) return decode_dfim(bytes);
  throw Error(ErrorCode::DecodeError, "unrecognized image format");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  return decode_image(detail::read_file(path));
}

}  // namespace dragonfly
