#include "rds/errors.hpp"
#include "rds/rng.hpp"
#include "rds/tensor_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace rds;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("tensor io: save/load round trip is bitwise") {
  RngStream rng(3);
  for (const Shape& shape : {Shape{3, 3}, Shape{17}}) {
    const Tensor t = rng.gaussian(shape);
    const std::string path = temp_path("rds_roundtrip.rtn");
    save_tensor(path, t);
    const Tensor back = load_tensor(path);
    REQUIRE(back.shape() == t.shape());
    for (Index i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
  }
}

TEST_CASE("tensor io: sidecar records shape and range") {
  const Tensor t = Tensor::constant({4, 2}, 0.5);
  const std::string path = temp_path("rds_sidecar.rtn");
  save_tensor(path, t, "unit test");
  std::ifstream meta(path + ".json");
  REQUIRE(meta.good());
  const auto j = nlohmann::json::parse(meta);
  CHECK(j.at("shape").get<std::vector<long>>() == std::vector<long>{4, 2});
  CHECK(j.at("range").get<std::string>() == "[-1,1]");
  CHECK(j.at("provenance").get<std::string>() == "unit test");
}

TEST_CASE("tensor io: bad magic and truncation report byte offsets") {
  const std::string path = temp_path("rds_bad.rtn");
  {
    std::ofstream out(path, std::ios::binary);
    out << "BAD!abcdefgh";
  }
  try {
    load_tensor(path);
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(e.byte_offset() == 0);
  }

  const Tensor t = Tensor::constant({8}, 1.0);
  save_tensor(path, t);
  std::filesystem::resize_file(path, 24);  // chop the payload
  CHECK_THROWS_AS(load_tensor(path), format_error);

  CHECK_THROWS_AS(load_tensor(temp_path("rds_missing_file.rtn")), std::runtime_error);
}

TEST_CASE("pgm export: clamping to the byte range") {
  const std::string path = temp_path("rds_preview.pgm");

  save_pgm(path, Tensor::constant({4, 5}, -1.0));
  {
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "P5");
    std::string dims, maxval;
    std::getline(in, dims);
    std::getline(in, maxval);
    CHECK(dims == "5 4");
    CHECK(maxval == "255");
    for (int i = 0; i < 20; ++i) CHECK(in.get() == 0);
  }

  save_pgm(path, Tensor::constant({4, 5}, 1.0));
  {
    std::ifstream in(path, std::ios::binary);
    std::string skip;
    std::getline(in, skip);
    std::getline(in, skip);
    std::getline(in, skip);
    for (int i = 0; i < 20; ++i) CHECK(in.get() == 255);
  }

  // Out-of-range values clamp rather than wrap.
  save_pgm(path, Tensor::constant({4, 5}, 7.0));
  {
    std::ifstream in(path, std::ios::binary);
    std::string skip;
    std::getline(in, skip);
    std::getline(in, skip);
    std::getline(in, skip);
    CHECK(in.get() == 255);
  }
}

TEST_CASE("pgm export: rejects non-images") {
  CHECK_THROWS_AS(save_pgm(temp_path("x.pgm"), Tensor({7})), std::invalid_argument);
}
