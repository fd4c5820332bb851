#include <gtest/gtest.h>

#include <random>

#include "geoquery/common/errors.hpp"
#include "geoquery/numerics/archive.hpp"
#include "random_tensors.hpp"

namespace {

namespace nx = geoquery::numerics;
using geoquery::DataError;

TEST(TensorArchive, RoundTripPreservesBitsOrderAndMeta) {
  std::mt19937_64 rng(1);
  nx::TensorArchive a;
  a.meta["config"] = {{"H", 7}, {"S", 16}};
  a.put("zeta", geoquery::testing::random_normal({3, 4}, rng, false));
  a.put("alpha", geoquery::testing::random_normal({5}, rng, false));
  const auto bytes = a.serialize();
  auto b = nx::TensorArchive::deserialize(bytes);
  EXPECT_EQ(b.meta, a.meta);
  ASSERT_EQ(b.entries().size(), 2u);
  EXPECT_EQ(b.entries()[0].name, "zeta");
  EXPECT_EQ(b.entries()[0].values, a.entries()[0].values);
  EXPECT_EQ(b.serialize(), bytes);
}

TEST(TensorArchive, HeaderIsLittleEndian) {
  nx::TensorArchive a;
  a.put("x", {1}, {1.0});
  const auto bytes = a.serialize();
  EXPECT_EQ(bytes.substr(0, 4), "GQTA");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), nx::kArchiveFormatVersion);
  EXPECT_EQ(bytes[5], 0);
  // 1.0 as float64 LE ends with 0xF0 0x3F.
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 1]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 2]), 0xF0);
}

TEST(TensorArchive, RejectsCorruptInput) {
  nx::TensorArchive a;
  a.put("x", {2}, {1.0, 2.0});
  auto bytes = a.serialize();
  EXPECT_THROW(nx::TensorArchive::deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  EXPECT_THROW(nx::TensorArchive::deserialize(bytes + "x"), DataError);
  bytes[0] = 'X';
  EXPECT_THROW(nx::TensorArchive::deserialize(bytes), DataError);
  EXPECT_THROW(a.tensor("missing"), DataError);
}

}  // namespace
