#include "higen/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace higen {

namespace {

constexpr int kMaxRank = 8;
constexpr std::int64_t kMaxElements = 1 << 28;

std::vector<double> check_shape(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("tensor dim must be positive, got " + higen::shape_str(shape));
    n *= d;
    if (n > kMaxElements) throw DimensionError("tensor too large: " + higen::shape_str(shape));
  }
  return std::vector<double>(static_cast<std::size_t>(n), 0.0);
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)), values_(check_shape(shape_)) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values) : shape_(std::move(shape)) {
  std::vector<double> zeros = check_shape(shape_);
  if (zeros.size() != values.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + higen::shape_str(shape_));
  }
  values_ = std::move(values);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.flat().setConstant(v);
  return t;
}

MatrixMap Tensor::matrix() {
  if (rank() != 2) throw DimensionError("rank-2 view of " + shape_str());
  return MatrixMap(values_.data(), dim(0), dim(1));
}

ConstMatrixMap Tensor::matrix() const {
  if (rank() != 2) throw DimensionError("rank-2 view of " + shape_str());
  return ConstMatrixMap(values_.data(), dim(0), dim(1));
}

MatrixMap Tensor::matrix(int rows, int cols) {
  if (rows * cols != numel()) {
    throw DimensionError("cannot view " + shape_str() + " as " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  return MatrixMap(values_.data(), rows, cols);
}

ConstMatrixMap Tensor::matrix(int rows, int cols) const {
  if (rows * cols != numel()) {
    throw DimensionError("cannot view " + shape_str() + " as " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  return ConstMatrixMap(values_.data(), rows, cols);
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const { return higen::shape_str(shape_); }

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

int shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return static_cast<int>(n);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

[[noreturn]] void bad_format(const std::string& context, std::int64_t offset, const std::string& what) {
  std::ostringstream os;
  os << "malformed tensor";
  if (!context.empty()) os << " in " << context;
  os << " at offset " << offset << ": " << what;
  throw FormatError(os.str());
}

std::uint32_t get_u32(std::istream& in, const std::string& context, std::int64_t& offset,
                      const char* what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) bad_format(context, offset, std::string("truncated ") + what);
  offset += 4;
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write("HGT1", 4);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i) put_u32(out, static_cast<std::uint32_t>(t.dim(i)));
  for (int i = 0; i < t.numel(); ++i) put_f32(out, static_cast<float>(t[i]));
}

Tensor read_tensor(std::istream& in, const std::string& context) {
  std::int64_t offset = static_cast<std::int64_t>(in.tellg());
  if (offset < 0) offset = 0;
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4) bad_format(context, offset, "truncated magic");
  if (std::memcmp(magic, "HGT1", 4) != 0) bad_format(context, offset, "bad magic, expected HGT1");
  offset += 4;

  std::int64_t rank_offset = offset;
  std::uint32_t rank = get_u32(in, context, offset, "rank");
  if (rank > kMaxRank) bad_format(context, rank_offset, "rank " + std::to_string(rank) + " exceeds limit");

  std::vector<int> shape(rank);
  std::int64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::int64_t dim_offset = offset;
    std::uint32_t d = get_u32(in, context, offset, "dim");
    if (d == 0) bad_format(context, dim_offset, "zero dim");
    count *= d;
    if (count > kMaxElements) bad_format(context, dim_offset, "element count exceeds limit");
    shape[i] = static_cast<int>(d);
  }

  std::vector<double> values(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    std::uint32_t bits = get_u32(in, context, offset, "value");
    float f;
    std::memcpy(&f, &bits, 4);
    values[static_cast<std::size_t>(i)] = static_cast<double>(f);
  }
  return Tensor(std::move(shape), std::move(values));
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_tensor(out, t);
  if (!out) throw FormatError("write failed for " + path);
}

Tensor read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_tensor(in, path);
}

}  // namespace higen
