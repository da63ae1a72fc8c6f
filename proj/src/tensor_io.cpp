#include "bmp/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bmp {

namespace {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE-754 doubles required");

constexpr char kMagic[4] = {'T', 'L', 'T', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xFF);
    return r;
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
               static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

}  // namespace

void write_tlt(std::ostream& out, const Tensor& x) {
  out.write(kMagic, 4);
  if (x.mode_count() > 255) throw std::invalid_argument("TLT1 supports at most 255 modes");
  const char l = static_cast<char>(x.mode_count());
  out.write(&l, 1);
  for (std::size_t e : x.dims()) {
    if (e > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("TLT1 extent exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(e));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x[i]));
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!out) throw std::runtime_error("TLT1 write failed");
}

void write_tlt(const std::string& path, const Tensor& x) {
  auto f = open_out(path);
  write_tlt(f, x);
}

Tensor read_tlt(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a TLT1 file (bad magic)");
  char l = 0;
  in.read(&l, 1);
  const std::size_t mode_count = static_cast<unsigned char>(l);
  if (mode_count == 0) throw std::runtime_error("TLT1: zero modes");
  Dims dims(mode_count);
  for (auto& e : dims) e = get_u32(in);
  if (!in) throw std::runtime_error("TLT1: truncated header");
  Tensor x(dims);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), 8);
    x[i] = std::bit_cast<double>(to_le(bits));
  }
  if (!in) throw std::runtime_error("TLT1: truncated payload");
  return x;
}

Tensor read_tlt(const std::string& path) {
  auto f = open_in(path);
  return read_tlt(f);
}

void write_tlt(const std::string& path, const MaskTensor& mask) {
  write_tlt(path, mask.tensor());
}

MaskTensor read_mask_tlt(const std::string& path) { return MaskTensor(read_tlt(path)); }

Tensor read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v = std::stod(cell, &pos);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("CSV rows have inconsistent lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw std::runtime_error("CSV is empty");
  const std::size_t r = rows.size(), c = rows.front().size();
  Tensor x({r, c});
  const auto strides = layout_strides(x.dims());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) x[i * strides[0] + j * strides[1]] = rows[i][j];
  return x;
}

Tensor read_matrix_csv(const std::string& path) {
  auto f = open_in(path);
  return read_matrix_csv(f);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  auto f = open_out(path);
  write_matrix_csv(f, m);
}

}  // namespace bmp
