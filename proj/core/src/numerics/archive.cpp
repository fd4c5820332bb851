#include "geoquery/numerics/archive.hpp"

#include <bit>
#include <type_traits>
#include <unordered_set>

#include "geoquery/common/errors.hpp"
#include "geoquery/common/hash.hpp"

namespace geoquery::numerics {

namespace {

constexpr char kMagic[4] = {'G', 'Q', 'T', 'A'};

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("tensor archive truncated at byte " + std::to_string(pos_));
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorArchive::put(std::string name, const Tensor& tensor) {
  put(std::move(name), tensor.shape(), {tensor.data().begin(), tensor.data().end()});
}

void TensorArchive::put(std::string name, Shape shape, std::vector<Scalar> values) {
  if (numel(shape) != values.size()) {
    throw ShapeError("archive entry '" + name + "' has " + std::to_string(values.size()) +
                     " values for shape " + to_string(shape));
  }
  for (auto& e : entries_) {
    if (e.name == name) {
      e.shape = std::move(shape);
      e.values = std::move(values);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(shape), std::move(values)});
}

const TensorArchive::Entry* TensorArchive::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Tensor TensorArchive::tensor(std::string_view name) const {
  const auto* e = find(name);
  if (!e) throw DataError("tensor archive has no entry '" + std::string(name) + "'");
  return Tensor::from(e->shape, e->values);
}

std::string TensorArchive::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kArchiveFormatVersion);
  const auto meta_text = meta.dump();
  put_le<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  put_le<std::uint64_t>(out, entries_.size());
  for (const auto& e : entries_) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    out.push_back(static_cast<char>(sizeof(Scalar)));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) put_le<std::uint64_t>(out, d);
    using Bits = std::conditional_t<sizeof(Scalar) == 8, std::uint64_t, std::uint32_t>;
    for (auto v : e.values) put_le(out, std::bit_cast<Bits>(v));
  }
  return out;
}

TensorArchive TensorArchive::deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) throw DataError("not a tensor archive (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kArchiveFormatVersion) {
    throw DataError("unsupported tensor archive version " + std::to_string(version));
  }
  TensorArchive archive;
  const auto meta_len = in.get<std::uint64_t>();
  try {
    archive.meta = nlohmann::json::parse(in.take(meta_len));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("tensor archive metadata: ") + ex.what());
  }
  const auto count = in.get<std::uint64_t>();
  std::unordered_set<std::string> seen;
  for (std::uint64_t k = 0; k < count; ++k) {
    Entry e;
    e.name = std::string(in.take(in.get<std::uint32_t>()));
    if (!seen.insert(e.name).second) throw DataError("duplicate archive entry '" + e.name + "'");
    const auto width = static_cast<unsigned char>(in.take(1)[0]);
    if (width != 4 && width != 8) {
      throw DataError("archive entry '" + e.name + "' has unsupported element width " +
                      std::to_string(width));
    }
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = in.get<std::uint64_t>();
      if (d == 0) throw DataError("archive entry '" + e.name + "' has a zero dimension");
      e.shape.push_back(static_cast<std::size_t>(d));
    }
    const auto n = numel(e.shape);
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (width == 8) {
        e.values[i] = static_cast<Scalar>(std::bit_cast<double>(in.get<std::uint64_t>()));
      } else {
        e.values[i] = static_cast<Scalar>(std::bit_cast<float>(in.get<std::uint32_t>()));
      }
    }
    archive.entries_.push_back(std::move(e));
  }
  if (!in.done()) throw DataError("trailing bytes after tensor archive");
  return archive;
}

void TensorArchive::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

}  // namespace geoquery::numerics
