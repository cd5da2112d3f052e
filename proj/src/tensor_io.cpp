#include "rds/tensor_io.hpp"

#include "rds/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace rds {
namespace {

constexpr char kMagic[4] = {'R', 'T', 'N', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

std::uint64_t get_u64(std::ifstream& in, std::size_t& offset) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (in.gcount() != 8) throw format_error("truncated tensor file", offset);
  offset += 8;
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_tensor(const std::string& path, const Tensor& t, const std::string& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_tensor: cannot open " + path);
  out.write(kMagic, 4);
  put_u64(out, static_cast<std::uint64_t>(t.rank()));
  for (Index d : t.shape()) put_u64(out, static_cast<std::uint64_t>(d));
  for (Index i = 0; i < t.size(); ++i) put_f64(out, t[i]);
  if (!out) throw std::runtime_error("save_tensor: write failed for " + path);
  out.close();

  nlohmann::json sidecar;
  sidecar["shape"] = t.shape();
  sidecar["range"] = "[-1,1]";
  sidecar["provenance"] = provenance;
  std::ofstream meta(path + ".json");
  if (!meta) throw std::runtime_error("save_tensor: cannot open " + path + ".json");
  meta << sidecar.dump(2) << "\n";
}

Tensor load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_tensor: cannot open " + path);
  std::size_t offset = 0;

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4) throw format_error("truncated tensor file", 0);
  if (std::memcmp(magic, kMagic, 4) != 0) throw format_error("bad tensor magic", 0);
  offset = 4;

  const std::uint64_t rank = get_u64(in, offset);
  if (rank == 0 || rank > 2) throw format_error("unsupported tensor rank", 4);
  Shape shape;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const std::size_t at = offset;
    const std::uint64_t d = get_u64(in, offset);
    if (d == 0 || d > (1ull << 24)) throw format_error("bad tensor dimension", at);
    shape.push_back(static_cast<Index>(d));
    count *= d;
  }
  if (count > (1ull << 28)) throw format_error("tensor too large", 12);

  Tensor t(shape);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_u64(in, offset);
    double d;
    std::memcpy(&d, &bits, 8);
    t[static_cast<Index>(i)] = d;
  }
  return t;
}

void save_pgm(const std::string& path, const Tensor& image) {
  if (image.rank() != 2) throw std::invalid_argument("save_pgm: image must be 2-D");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pgm: cannot open " + path);
  out << "P5\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.dim(1)));
  for (Index i = 0; i < image.dim(0); ++i) {
    for (Index j = 0; j < image.dim(1); ++j) {
      const double v = std::clamp(image(i, j), -1.0, 1.0);
      row[static_cast<std::size_t>(j)] =
          static_cast<unsigned char>(std::lround((v + 1.0) * 0.5 * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace rds
