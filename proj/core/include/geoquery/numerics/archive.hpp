#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoquery/numerics/tensor.hpp"

namespace geoquery::numerics {

inline constexpr std::uint32_t kArchiveFormatVersion = 1;

/**
 * Named-tensor container used for checkpoints and model inputs.
 *
 * Layout (all integers little-endian):
 *
 *     bytes 0..3   magic "GQTA"
 *     u32          format version
 *     u64          metadata length L, then L bytes of UTF-8 JSON
 *     u64          entry count
 *     per entry:   u32 name length, name bytes,
 *                  u8 element width (4 = float32, 8 = float64),
 *                  u32 rank, u64 × rank dims,
 *                  numel × element width bytes of IEEE-754 little-endian values
 *
 * Entries keep insertion order.
 */
class TensorArchive {
 public:
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<Scalar> values;
  };

  nlohmann::json meta = nlohmann::json::object();

  void put(std::string name, const Tensor& tensor);
  void put(std::string name, Shape shape, std::vector<Scalar> values);

  const Entry* find(std::string_view name) const;
  /// Throws DataError when absent.
  Tensor tensor(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }

  std::string serialize() const;
  static TensorArchive deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::vector<Entry> entries_;
};

}  // namespace geoquery::numerics
