#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spikebench::data {

// Image/label pairs, images flattened to input_size bytes each.
struct Dataset {
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<std::uint8_t> images;  // size() * rows * cols bytes
  std::vector<std::uint8_t> labels;  // one digit per image

  std::size_t size() const { return labels.size(); }
  std::size_t pixels_per_image() const { return rows * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return {images.data() + i * pixels_per_image(), pixels_per_image()};
  }
  std::vector<double> image_as_doubles(std::size_t i) const;
  void validate() const;
};

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

// IDX readers. Both accept plain files and gzip-compressed files (detected
// by the 0x1f 0x8b prefix, not the extension). Bad magic throws FormatError,
// short payloads throw DataError, unreadable paths throw IoError.
IdxImages load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

// IDX writers, used by the synthetic corpus generator and round-trip tests.
void save_idx_images(const std::string& path, const IdxImages& images, bool gzip = false);
void save_idx_labels(const std::string& path, std::span<const std::uint8_t> labels,
                     bool gzip = false);

// Loads the train or test split from a directory using the conventional
// file names (train-images-idx3-ubyte / t10k-images-idx3-ubyte and matching
// label files), with or without a .gz suffix.
Dataset load_dataset(const std::string& dir, bool train_split);

// Writes a dataset back out under the same conventional names.
void save_dataset(const std::string& dir, const Dataset& ds, bool train_split,
                  bool gzip = false);

// Picks `total` indices spread evenly over the ten digits: total / 10 from
// each class in file order, remainder going to the lower digits, interleaved
// by class so any prefix is also roughly balanced. Throws DataError when a
// class cannot supply its share.
std::vector<std::size_t> stratified_indices(const Dataset& ds, std::size_t total);

}  // namespace spikebench::data
