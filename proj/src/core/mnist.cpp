#include "core/mnist.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/errors.hpp"

namespace spikebench::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;  // ubyte, 3 dimensions
constexpr std::uint32_t kLabelMagic = 0x00000801;  // ubyte, 1 dimension

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path);
  return bytes;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::string& path) {
  z_stream zs{};
  // 15 + 32: accept both zlib and gzip wrappers.
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("inflateInit failed for " + path);

  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::array<std::uint8_t, 1 << 16> buf;
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("gzip stream in " + path + " is damaged (zlib rc " +
                        std::to_string(rc) + ")");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> in,
                                        const std::string& path) {
  z_stream zs{};
  // 15 + 16: emit a gzip wrapper.
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK)
    throw IoError("deflateInit failed for " + path);

  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> buf;
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = deflate(&zs, Z_FINISH);
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path);
  return bytes;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(std::uint8_t(x >> 24));
  out.push_back(std::uint8_t(x >> 16));
  out.push_back(std::uint8_t(x >> 8));
  out.push_back(std::uint8_t(x));
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes, bool gzip) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  if (gzip) {
    const auto packed = gzip_compress(bytes, path);
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
  } else {
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw IoError("write failed on " + path);
}

// Finds `base` or `base.gz` inside dir. Empty string when neither exists.
std::string find_split_file(const std::string& dir, const std::string& base) {
  namespace fs = std::filesystem;
  const fs::path plain = fs::path(dir) / base;
  if (fs::exists(plain)) return plain.string();
  const fs::path packed = fs::path(dir) / (base + ".gz");
  if (fs::exists(packed)) return packed.string();
  return {};
}

}  // namespace

std::vector<double> Dataset::image_as_doubles(std::size_t i) const {
  const auto px = image(i);
  return std::vector<double>(px.begin(), px.end());
}

void Dataset::validate() const {
  if (images.size() != labels.size() * pixels_per_image())
    throw DataError("dataset: image bytes do not match label count");
  for (auto l : labels)
    if (l > 9) throw DataError("dataset: label value " + std::to_string(l) + " is not a digit");
}

IdxImages load_idx_images(const std::string& path) {
  const auto bytes = read_maybe_gzip(path);
  if (bytes.size() < 16) throw FormatError(path + ": too short for an IDX image header");
  const std::uint32_t magic = be32(bytes.data());
  if (magic != kImageMagic)
    throw FormatError(path + ": magic " + std::to_string(magic) +
                      " is not an IDX ubyte image file");
  IdxImages out;
  out.count = be32(bytes.data() + 4);
  out.rows = be32(bytes.data() + 8);
  out.cols = be32(bytes.data() + 12);
  const std::size_t expected = out.count * out.rows * out.cols;
  if (bytes.size() - 16 < expected)
    throw DataError(path + ": payload truncated, expected " + std::to_string(expected) +
                    " pixel bytes, found " + std::to_string(bytes.size() - 16));
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + expected);
  return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
  const auto bytes = read_maybe_gzip(path);
  if (bytes.size() < 8) throw FormatError(path + ": too short for an IDX label header");
  const std::uint32_t magic = be32(bytes.data());
  if (magic != kLabelMagic)
    throw FormatError(path + ": magic " + std::to_string(magic) +
                      " is not an IDX ubyte label file");
  const std::size_t count = be32(bytes.data() + 4);
  if (bytes.size() - 8 < count)
    throw DataError(path + ": payload truncated, expected " + std::to_string(count) +
                    " labels, found " + std::to_string(bytes.size() - 8));
  std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + 8 + count);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 9)
      throw DataError(path + ": label " + std::to_string(labels[i]) + " at index " +
                      std::to_string(i) + " is not a digit");
  return labels;
}

void save_idx_images(const std::string& path, const IdxImages& images, bool gzip) {
  if (images.pixels.size() != images.count * images.rows * images.cols)
    throw InvalidArgumentError("save_idx_images: pixel buffer does not match dimensions");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + images.pixels.size());
  put_be32(bytes, kImageMagic);
  put_be32(bytes, static_cast<std::uint32_t>(images.count));
  put_be32(bytes, static_cast<std::uint32_t>(images.rows));
  put_be32(bytes, static_cast<std::uint32_t>(images.cols));
  bytes.insert(bytes.end(), images.pixels.begin(), images.pixels.end());
  write_file(path, bytes, gzip);
}

void save_idx_labels(const std::string& path, std::span<const std::uint8_t> labels, bool gzip) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + labels.size());
  put_be32(bytes, kLabelMagic);
  put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_file(path, bytes, gzip);
}

Dataset load_dataset(const std::string& dir, bool train_split) {
  const std::string img_base =
      train_split ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  const std::string lbl_base =
      train_split ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";

  const std::string img_path = find_split_file(dir, img_base);
  const std::string lbl_path = find_split_file(dir, lbl_base);
  if (img_path.empty() || lbl_path.empty())
    throw IoError("dataset directory " + dir + " is missing " +
                  (img_path.empty() ? img_base : lbl_base) + "[.gz]");

  const auto images = load_idx_images(img_path);
  auto labels = load_idx_labels(lbl_path);
  if (images.count != labels.size())
    throw DataError(dir + ": " + std::to_string(images.count) + " images but " +
                    std::to_string(labels.size()) + " labels");

  Dataset ds;
  ds.rows = images.rows;
  ds.cols = images.cols;
  ds.images = images.pixels;
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

void save_dataset(const std::string& dir, const Dataset& ds, bool train_split, bool gzip) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string suffix = gzip ? ".gz" : "";
  const std::string img_base =
      train_split ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  const std::string lbl_base =
      train_split ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";

  IdxImages img;
  img.count = ds.size();
  img.rows = ds.rows;
  img.cols = ds.cols;
  img.pixels = ds.images;
  save_idx_images((fs::path(dir) / (img_base + suffix)).string(), img, gzip);
  save_idx_labels((fs::path(dir) / (lbl_base + suffix)).string(), ds.labels, gzip);
}

std::vector<std::size_t> stratified_indices(const Dataset& ds, std::size_t total) {
  if (total == 0) return {};
  if (total > ds.size())
    throw DataError("stratified_indices: asked for " + std::to_string(total) +
                    " samples from a dataset of " + std::to_string(ds.size()));

  std::array<std::vector<std::size_t>, 10> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  std::array<std::size_t, 10> want{};
  for (int d = 0; d < 10; ++d) want[d] = total / 10;
  for (std::size_t r = 0; r < total % 10; ++r) want[r] += 1;

  for (int d = 0; d < 10; ++d)
    if (want[d] > by_class[d].size())
      throw DataError("stratified_indices: class " + std::to_string(d) + " has only " +
                      std::to_string(by_class[d].size()) + " samples, need " +
                      std::to_string(want[d]));

  // Interleave by class so truncating the result keeps it near-balanced.
  std::vector<std::size_t> out;
  out.reserve(total);
  for (std::size_t k = 0; out.size() < total; ++k)
    for (int d = 0; d < 10 && out.size() < total; ++d)
      if (k < want[d]) out.push_back(by_class[d][k]);
  return out;
}

}  // namespace spikebench::data
