#include "layoutkit/tensor_io.hpp"

#include "layoutkit/error.hpp"
#include "wire.hpp"

namespace layoutkit {

void save_tensor(const std::string& path,
                 const std::vector<std::uint32_t>& dims,
                 const std::vector<double>& data) {
  if (dims.empty()) raise(ErrorCode::InvalidArgument, "tensor needs a rank");
  std::uint64_t expect = 1;
  for (std::uint32_t d : dims) expect *= d;
  if (expect != data.size()) {
    raise(ErrorCode::InvalidArgument,
          "tensor data length does not match its dimensions");
  }
  std::string out;
  out.reserve(16 + dims.size() * 4 + data.size() * 4);
  out += "LTT1";
  wire::put_u32(out, 1);  // container version
  wire::put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) wire::put_u32(out, d);
  for (double v : data) wire::put_f32(out, static_cast<float>(v));
  wire::write_file(path, out);
}

TensorFile load_tensor(const std::string& path) {
  std::string data = wire::read_file(path);
  if (data.size() < 4 || data.compare(0, 4, "LTT1") != 0) {
    raise(ErrorCode::Parse, "not a tensor file: bad magic");
  }
  std::size_t pos = 4;
  std::uint32_t version = wire::get_u32(data, pos);
  if (version != 1) raise(ErrorCode::Parse, "unsupported tensor file version");
  std::uint32_t rank = wire::get_u32(data, pos);
  if (rank == 0 || rank > 8) raise(ErrorCode::Parse, "implausible tensor rank");
  TensorFile t;
  std::uint64_t count = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    t.dims.push_back(wire::get_u32(data, pos));
    count *= t.dims.back();
  }
  if (pos + count * 4 != data.size()) {
    raise(ErrorCode::Parse, "tensor file size does not match its header");
  }
  t.data.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    t.data.push_back(static_cast<double>(wire::get_f32(data, pos)));
  }
  return t;
}

void save_mat(const std::string& path, const Mat& m) {
  save_tensor(path,
              {static_cast<std::uint32_t>(m.rows),
               static_cast<std::uint32_t>(m.cols)},
              m.a);
}

Mat load_mat(const std::string& path) {
  TensorFile t = load_tensor(path);
  if (t.dims.size() != 2) {
    raise(ErrorCode::Parse, "expected a rank-2 tensor");
  }
  Mat m(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
  m.a = std::move(t.data);
  return m;
}

}  // namespace layoutkit
